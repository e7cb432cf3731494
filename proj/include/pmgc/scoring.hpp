#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pmgc/forecaster.hpp"
#include "pmgc/matrix.hpp"

namespace pmgc {

// Absolute forecast errors, N x scored ticks; the first w-1 ticks of the
// test series have no full window and are unscored.
struct ErrorMatrix {
    Matrix2D err;
    int first_tick = 0;  // absolute tick of column 0
};

// Per-series median and interquartile range of the error set.
struct RobustStats {
    std::vector<double> median;
    std::vector<double> iqr;
};

struct ScoreSeries {
    std::vector<double> scores;       // max over channels, one per scored tick
    std::vector<int> top_channel;     // argmax channel per tick
    int first_tick = 0;
    std::optional<double> threshold;
    std::vector<int> decisions;       // present iff threshold set; score > threshold
};

// Slides a window to every tick t >= w-1, forecasts with the model's own
// mode, and records |x_{i,t} - yhat_{i,t}| using the last-horizon prediction
// of the window ending at t.
ErrorMatrix forecast_errors(const Matrix2D& test, const ModelParams& params);

// Quartiles by linear interpolation over sorted order statistics; needs at
// least 4 scored ticks.
RobustStats robust_stats(const ErrorMatrix& err);

// a_i^t = (Err_i^t - median_i) / max(iqr_i, 1e-6); aggregated by channel max.
ScoreSeries normalize_and_aggregate(const ErrorMatrix& err, const RobustStats& stats);

ScoreSeries apply_threshold(ScoreSeries scores, double threshold);

// Quantile helper shared with tests: linear interpolation between order
// statistics of the sorted input, q in [0,1].
double quantile_sorted(const std::vector<double>& sorted, double q);

// Score table: '#'-prefixed header, then one row per scored tick:
// tick, score, top channel, and decision when thresholded.
void write_scores(const std::string& path, const ScoreSeries& scores);
ScoreSeries read_scores(const std::string& path);

}  // namespace pmgc
