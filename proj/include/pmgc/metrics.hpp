#pragma once

#include <string>
#include <vector>

namespace pmgc {

// Inclusive [begin, end] index range of one contiguous label-1 run.
struct EventSegment {
    int begin = 0;
    int end = 0;
};

struct Prf {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

enum class MetricKind { Pointwise, Composite };

struct BestF1 {
    double threshold = 0.0;
    double value = 0.0;
};

// Maximal contiguous runs of 1s. Throws on labels outside {0,1}.
std::vector<EventSegment> segments_from_labels(const std::vector<int>& labels);

// Point-wise precision/recall/F1 with the 0/0 -> 0 convention.
Prf f1_pointwise(const std::vector<int>& predictions, const std::vector<int>& labels);

// Harmonic mean of point-wise precision and event-wise recall (an event is
// recalled when any of its ticks is predicted positive); 0/0 -> 0.
double f1_composite(const std::vector<int>& predictions, const std::vector<int>& labels);

double f1_at_threshold(const std::vector<double>& scores, const std::vector<int>& labels,
                       double threshold, MetricKind kind);

// Sweeps thresholds at midpoints between consecutive distinct score values
// plus -inf/+inf sentinels; decision rule is strict (score > threshold).
// Ties resolve to the lowest threshold.
BestF1 best_f1(const std::vector<double>& scores, const std::vector<int>& labels, MetricKind kind);

}  // namespace pmgc
