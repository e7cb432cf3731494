#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pmgc/matrix.hpp"
#include "pmgc/window.hpp"

namespace pmgc {

// A loaded multivariate series: values are N x T (channels x ticks).
struct RawSeries {
    Matrix2D values;
    std::vector<std::string> channel_names;
    std::vector<int> labels;  // empty when the series is unlabeled

    int channels() const { return values.rows; }
    int ticks() const { return values.cols; }
    bool has_labels() const { return !labels.empty(); }
};

enum class MissingPolicy { Reject, ForwardFill };

// CSV: UTF-8, comma separated, header row, one row per tick; optional final
// column named "label" holding 0/1. Errors name the offending row/column.
RawSeries load_csv(const std::string& path, bool has_labels,
                   MissingPolicy missing = MissingPolicy::Reject);
void write_csv(const std::string& path, const RawSeries& series);

// True when the CSV's last header field is "label".
bool csv_has_label_column(const std::string& path);

enum class NormKind { MinMax, ZScore };

// Per-channel statistics, always computed from the training series.
struct NormalizationStats {
    std::vector<double> min, max, mean, stddev;
    int channels() const { return static_cast<int>(min.size()); }
};

NormalizationStats compute_stats(const RawSeries& train);

// MinMax: x -> (x - min) / (max - min), constant channels -> 0; no clipping,
// so test data normalized with training stats may leave [0,1].
// ZScore: x -> (x - mean) / stddev, constant channels -> 0.
RawSeries normalize_channels(const RawSeries& series, const NormalizationStats& stats,
                             NormKind kind = NormKind::MinMax);

// Stride-1 windows; T - w + 1 samples, each split into context (w-p) and
// target (p) columns. Labels, when present, ride along untouched.
std::vector<WindowSample> make_windows(const RawSeries& series, int w, int p);

// Median of every `every` consecutive ticks per channel; labels aggregate by
// max. For users bringing 1 Hz benchmark dumps.
RawSeries median_downsample(const RawSeries& series, int every);

// --- synthetic generator -----------------------------------------------------

enum class AnomalyType { Spike, LevelShift, CorrelationBreak };

struct AnomalySpec {
    AnomalyType type = AnomalyType::Spike;
    int start = 0;     // tick within the test range
    int duration = 1;
    double magnitude = 1.0;  // in units of channel std; scales amplitude for breaks
};

struct SynthSpec {
    int channels = 8;
    int train_ticks = 2000;
    int test_ticks = 1000;
    std::uint64_t seed = 0;
    int latents = 3;          // shared sinusoidal drivers
    double noise_std = 0.05;  // relative to unit latent amplitude
    std::vector<AnomalySpec> anomalies;
};

// Channels are per-channel mixtures of shared sinusoids plus Gaussian noise;
// anomalies are injected into the test half only, labeled 1 over their
// extent. Deterministic given the spec.
struct SynthData {
    RawSeries train;
    RawSeries test;  // labeled
};
SynthData synth_generate(const SynthSpec& spec);

// Key-value spec file: `key = value` lines, '#' comments, repeated
// `anomaly = type,start,duration,magnitude` lines accumulate.
SynthSpec parse_synth_spec(const std::string& path);

// Locale-independent shortest-round-trip formatting used for every numeric
// file this project writes.
std::string format_double(double v);
double parse_double(const std::string& s, bool* ok = nullptr);

}  // namespace pmgc
