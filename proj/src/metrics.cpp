#include "pmgc/metrics.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace pmgc {

namespace {

void require_binary(const std::vector<int>& v, const char* what) {
    for (int x : v)
        if (x != 0 && x != 1) throw std::invalid_argument(std::string(what) + ": values must be 0/1");
}

void require_aligned(const std::vector<int>& predictions, const std::vector<int>& labels) {
    if (predictions.size() != labels.size())
        throw std::invalid_argument("metrics: prediction/label length mismatch (" +
                                    std::to_string(predictions.size()) + " vs " +
                                    std::to_string(labels.size()) + ")");
    require_binary(predictions, "predictions");
    require_binary(labels, "labels");
}

double harmonic(double a, double b) { return a + b > 0.0 ? 2.0 * a * b / (a + b) : 0.0; }

}  // namespace

std::vector<EventSegment> segments_from_labels(const std::vector<int>& labels) {
    require_binary(labels, "labels");
    std::vector<EventSegment> segments;
    int start = -1;
    for (int i = 0; i < static_cast<int>(labels.size()); ++i) {
        if (labels[i] == 1 && start < 0) start = i;
        if (labels[i] == 0 && start >= 0) {
            segments.push_back({start, i - 1});
            start = -1;
        }
    }
    if (start >= 0) segments.push_back({start, static_cast<int>(labels.size()) - 1});
    return segments;
}

Prf f1_pointwise(const std::vector<int>& predictions, const std::vector<int>& labels) {
    require_aligned(predictions, labels);
    long tp = 0, fp = 0, fn = 0;
    for (size_t i = 0; i < labels.size(); ++i) {
        if (predictions[i] == 1 && labels[i] == 1) ++tp;
        else if (predictions[i] == 1) ++fp;
        else if (labels[i] == 1) ++fn;
    }
    Prf out;
    out.precision = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
    out.recall = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
    out.f1 = harmonic(out.precision, out.recall);
    return out;
}

double f1_composite(const std::vector<int>& predictions, const std::vector<int>& labels) {
    require_aligned(predictions, labels);
    const Prf pointwise = f1_pointwise(predictions, labels);
    const std::vector<EventSegment> events = segments_from_labels(labels);
    if (events.empty()) return 0.0;
    int hit = 0;
    for (const EventSegment& e : events) {
        for (int i = e.begin; i <= e.end; ++i) {
            if (predictions[i] == 1) {
                ++hit;
                break;
            }
        }
    }
    const double event_recall = static_cast<double>(hit) / events.size();
    return harmonic(pointwise.precision, event_recall);
}

double f1_at_threshold(const std::vector<double>& scores, const std::vector<int>& labels,
                       double threshold, MetricKind kind) {
    if (scores.size() != labels.size())
        throw std::invalid_argument("metrics: score/label length mismatch");
    std::vector<int> predictions(scores.size());
    for (size_t i = 0; i < scores.size(); ++i) predictions[i] = scores[i] > threshold ? 1 : 0;
    if (kind == MetricKind::Pointwise) return f1_pointwise(predictions, labels).f1;
    return f1_composite(predictions, labels);
}

BestF1 best_f1(const std::vector<double>& scores, const std::vector<int>& labels, MetricKind kind) {
    if (scores.empty()) throw std::invalid_argument("best_f1: empty input");
    if (scores.size() != labels.size())
        throw std::invalid_argument("best_f1: score/label length mismatch");

    std::vector<double> sorted = scores;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

    std::vector<double> candidates;
    candidates.push_back(-std::numeric_limits<double>::infinity());
    for (size_t i = 0; i + 1 < sorted.size(); ++i)
        candidates.push_back(0.5 * (sorted[i] + sorted[i + 1]));
    candidates.push_back(std::numeric_limits<double>::infinity());

    BestF1 best{candidates.front(), -1.0};
    for (double threshold : candidates) {
        const double value = f1_at_threshold(scores, labels, threshold, kind);
        if (value > best.value) best = {threshold, value};
    }
    return best;
}

}  // namespace pmgc
