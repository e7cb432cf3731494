#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pmgc/data_pipeline.hpp"
#include "pmgc/forecaster.hpp"

namespace pmgc {

struct TrainConfig {
    ModelConfig model;
    int epochs = 10;
    int batch_size = 32;
    double learning_rate = 1e-3;
    double validation_fraction = 0.2;
    std::uint64_t seed = 0;
    bool validation_total_loss = true;  // false: validate on prediction loss only
};

struct EpochStats {
    double train_loss = 0.0;  // mean per-sample total loss over the epoch
    double val_loss = 0.0;    // selection criterion (total or prediction loss)
    double val_prediction = 0.0;
    double val_cohesion = 0.0;
};

struct TrainHistory {
    std::vector<EpochStats> epochs;
    int best_epoch = 0;  // argmin of val_loss, earliest on ties
    std::int64_t zero_norm_rows = 0;
};

// Temporal split: validation is the chronologically last ceil(fraction * M)
// windows; ordering preserved on both sides.
std::pair<std::vector<WindowSample>, std::vector<WindowSample>> split_train_val(
    const std::vector<WindowSample>& windows, double fraction);

// Seeded mini-batch Adam over the train split; per-batch gradient is the mean
// of per-sample gradients. Returns the parameters of the best-validation
// epoch. Fully deterministic given (windows, config).
std::pair<ModelParams, TrainHistory> train(const std::vector<WindowSample>& windows,
                                           const TrainConfig& config);

// Mean per-sample loss over a window set (no gradients).
LossBreakdown evaluate(const std::vector<WindowSample>& windows, const ModelParams& params,
                       const ModelConfig& config);

// --- checkpoint --------------------------------------------------------------
// Plain-text, line oriented, numbers in shortest round-trip decimal form;
// stable byte-for-byte across identical runs. Layout documented in README.md.

struct Checkpoint {
    ModelParams params;
    TrainConfig config;
    TrainHistory history;
    NormalizationStats stats;
    NormKind norm_kind = NormKind::MinMax;
    std::vector<std::string> channel_names;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace pmgc
