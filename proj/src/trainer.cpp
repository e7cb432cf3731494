#include "pmgc/trainer.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "pmgc/rng.hpp"

namespace pmgc {

std::pair<std::vector<WindowSample>, std::vector<WindowSample>> split_train_val(
    const std::vector<WindowSample>& windows, double fraction) {
    if (fraction <= 0.0 || fraction >= 1.0)
        throw std::invalid_argument("split_train_val: fraction must be in (0,1)");
    if (windows.size() < 2) throw std::invalid_argument("split_train_val: need at least 2 windows");
    const size_t val_count =
        static_cast<size_t>(std::ceil(fraction * static_cast<double>(windows.size())));
    const size_t train_count = windows.size() - val_count;
    if (train_count == 0)
        throw std::invalid_argument("split_train_val: fraction leaves no training windows");
    return {std::vector<WindowSample>(windows.begin(), windows.begin() + train_count),
            std::vector<WindowSample>(windows.begin() + train_count, windows.end())};
}

LossBreakdown evaluate(const std::vector<WindowSample>& windows, const ModelParams& params,
                       const ModelConfig& config) {
    LossBreakdown mean;
    for (const WindowSample& sample : windows) {
        const LossBreakdown b = total_loss(sample, params, config);
        mean.total += b.total;
        mean.prediction += b.prediction;
        mean.cohesion += b.cohesion;
    }
    const double m = windows.empty() ? 1.0 : static_cast<double>(windows.size());
    mean.total /= m;
    mean.prediction /= m;
    mean.cohesion /= m;
    return mean;
}

std::pair<ModelParams, TrainHistory> train(const std::vector<WindowSample>& windows,
                                           const TrainConfig& config) {
    config.model.validate();
    if (config.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
    if (config.batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
    if (windows.empty()) throw std::invalid_argument("train: no windows");
    for (const WindowSample& s : windows)
        if (s.full.cols != config.model.w || s.pred_len != config.model.p ||
            s.channels() != windows[0].channels())
            throw std::invalid_argument("train: window shapes inconsistent with config");

    auto [train_set, val_set] = split_train_val(windows, config.validation_fraction);

    ModelParams params = init_model_params(windows[0].channels(), config.model, config.seed);
    AdamState adam(params.store, AdamConfig{config.learning_rate, 0.9, 0.999, 1e-8});

    TrainHistory history;
    ModelParams best = params;
    double best_val = std::numeric_limits<double>::infinity();

    std::vector<size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        SeededRng shuffle_rng(seed_for(config.seed, "epoch-" + std::to_string(epoch)));
        std::iota(order.begin(), order.end(), 0);
        shuffle_rng.shuffle(order);

        double epoch_loss_sum = 0.0;
        size_t seen = 0;
        for (size_t batch_start = 0; batch_start < order.size();
             batch_start += static_cast<size_t>(config.batch_size)) {
            const size_t batch_end =
                std::min(order.size(), batch_start + static_cast<size_t>(config.batch_size));
            const double batch_n = static_cast<double>(batch_end - batch_start);

            ParamStore batch_grads;
            for (const auto& [name, p] : params.store) batch_grads.insert(name, Matrix2D(p.rows, p.cols));

            for (size_t i = batch_start; i < batch_end; ++i) {
                ParamStore sample_grads;
                const LossBreakdown b =
                    total_loss_with_grads(train_set[order[i]], params, config.model, &sample_grads,
                                          &history.zero_norm_rows);
                if (!std::isfinite(b.total))
                    throw std::runtime_error("train: non-finite loss at epoch " +
                                             std::to_string(epoch) + ", batch starting at sample " +
                                             std::to_string(batch_start));
                epoch_loss_sum += b.total;
                ++seen;
                for (auto& [name, g] : batch_grads) {
                    const Matrix2D& sg = sample_grads.at(name);
                    for (int e = 0; e < g.size(); ++e) g.data[e] += sg.data[e] / batch_n;
                }
            }
            try {
                adam.step(params.store, batch_grads);
            } catch (const std::runtime_error& e) {
                throw std::runtime_error(std::string(e.what()) + " at epoch " +
                                         std::to_string(epoch) + ", batch starting at sample " +
                                         std::to_string(batch_start));
            }
        }

        EpochStats stats;
        stats.train_loss = seen ? epoch_loss_sum / static_cast<double>(seen) : 0.0;
        const LossBreakdown val = evaluate(val_set, params, config.model);
        stats.val_prediction = val.prediction;
        stats.val_cohesion = val.cohesion;
        stats.val_loss = config.validation_total_loss ? val.total : val.prediction;
        history.epochs.push_back(stats);

        if (stats.val_loss < best_val) {
            best_val = stats.val_loss;
            best = params;
            history.best_epoch = epoch;
        }
    }
    return {best, history};
}

// --- checkpoint --------------------------------------------------------------

namespace {

constexpr const char* kMagic = "pmgc-checkpoint v1";

std::string norm_kind_name(NormKind kind) { return kind == NormKind::MinMax ? "minmax" : "zscore"; }

NormKind parse_norm_kind(const std::string& s) {
    if (s == "minmax") return NormKind::MinMax;
    if (s == "zscore") return NormKind::ZScore;
    throw std::runtime_error("checkpoint: unknown normalization '" + s + "'");
}

std::string prop_name(Propagation p) {
    return p == Propagation::NormalizedAdjacency ? "adjacency" : "laplacian";
}

Propagation parse_prop(const std::string& s) {
    if (s == "adjacency") return Propagation::NormalizedAdjacency;
    if (s == "laplacian") return Propagation::Laplacian;
    throw std::runtime_error("checkpoint: unknown propagation '" + s + "'");
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    const ModelConfig& mc = ckpt.params.config;
    out << kMagic << '\n';
    out << "n " << ckpt.params.n << '\n';
    out << "w " << mc.w << '\n';
    out << "p " << mc.p << '\n';
    out << "d " << mc.d << '\n';
    out << "k " << mc.k << '\n';
    out << "beta " << format_double(mc.beta) << '\n';
    out << "tau " << format_double(mc.tau) << '\n';
    out << "lambda " << format_double(mc.lambda) << '\n';
    out << "mode " << mode_name(mc.mode) << '\n';
    out << "propagation " << prop_name(mc.propagation) << '\n';
    out << "epochs " << ckpt.config.epochs << '\n';
    out << "batch_size " << ckpt.config.batch_size << '\n';
    out << "learning_rate " << format_double(ckpt.config.learning_rate) << '\n';
    out << "validation_fraction " << format_double(ckpt.config.validation_fraction) << '\n';
    out << "seed " << ckpt.config.seed << '\n';
    out << "validation_total_loss " << (ckpt.config.validation_total_loss ? 1 : 0) << '\n';
    out << "norm " << norm_kind_name(ckpt.norm_kind) << '\n';
    for (int c = 0; c < ckpt.stats.channels(); ++c) {
        out << "channel " << ckpt.channel_names[c] << ' ' << format_double(ckpt.stats.min[c]) << ' '
            << format_double(ckpt.stats.max[c]) << ' ' << format_double(ckpt.stats.mean[c]) << ' '
            << format_double(ckpt.stats.stddev[c]) << '\n';
    }
    for (const EpochStats& e : ckpt.history.epochs) {
        out << "epoch " << format_double(e.train_loss) << ' ' << format_double(e.val_loss) << ' '
            << format_double(e.val_prediction) << ' ' << format_double(e.val_cohesion) << '\n';
    }
    out << "best_epoch " << ckpt.history.best_epoch << '\n';
    out << "zero_norm_rows " << ckpt.history.zero_norm_rows << '\n';
    for (const auto& [name, m] : ckpt.params.store) {
        out << "param " << name << ' ' << m.rows << ' ' << m.cols << '\n';
        for (int i = 0; i < m.rows; ++i) {
            for (int j = 0; j < m.cols; ++j) {
                if (j) out << ' ';
                out << format_double(m(i, j));
            }
            out << '\n';
        }
    }
    out << "end\n";
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line != kMagic)
        throw std::runtime_error("'" + path + "' is not a pmgc checkpoint");

    Checkpoint ckpt;
    ModelConfig& mc = ckpt.params.config;
    auto need_double = [&](std::istringstream& ss, const char* what) {
        std::string tok;
        if (!(ss >> tok)) throw std::runtime_error("checkpoint: missing " + std::string(what));
        bool ok = false;
        const double v = parse_double(tok, &ok);
        if (!ok) throw std::runtime_error("checkpoint: bad number for " + std::string(what));
        return v;
    };

    bool saw_end = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string key;
        ss >> key;
        if (key == "end") {
            saw_end = true;
            break;
        } else if (key == "n") ss >> ckpt.params.n;
        else if (key == "w") ss >> mc.w;
        else if (key == "p") ss >> mc.p;
        else if (key == "d") ss >> mc.d;
        else if (key == "k") ss >> mc.k;
        else if (key == "beta") mc.beta = need_double(ss, "beta");
        else if (key == "tau") mc.tau = need_double(ss, "tau");
        else if (key == "lambda") mc.lambda = need_double(ss, "lambda");
        else if (key == "mode") {
            std::string v;
            ss >> v;
            mc.mode = parse_mode(v);
        } else if (key == "propagation") {
            std::string v;
            ss >> v;
            mc.propagation = parse_prop(v);
        } else if (key == "epochs") ss >> ckpt.config.epochs;
        else if (key == "batch_size") ss >> ckpt.config.batch_size;
        else if (key == "learning_rate") ckpt.config.learning_rate = need_double(ss, "learning_rate");
        else if (key == "validation_fraction")
            ckpt.config.validation_fraction = need_double(ss, "validation_fraction");
        else if (key == "seed") ss >> ckpt.config.seed;
        else if (key == "validation_total_loss") {
            int v = 1;
            ss >> v;
            ckpt.config.validation_total_loss = v != 0;
        } else if (key == "norm") {
            std::string v;
            ss >> v;
            ckpt.norm_kind = parse_norm_kind(v);
        } else if (key == "channel") {
            std::string name;
            ss >> name;
            ckpt.channel_names.push_back(name);
            ckpt.stats.min.push_back(need_double(ss, "channel min"));
            ckpt.stats.max.push_back(need_double(ss, "channel max"));
            ckpt.stats.mean.push_back(need_double(ss, "channel mean"));
            ckpt.stats.stddev.push_back(need_double(ss, "channel std"));
        } else if (key == "epoch") {
            EpochStats e;
            e.train_loss = need_double(ss, "epoch train");
            e.val_loss = need_double(ss, "epoch val");
            e.val_prediction = need_double(ss, "epoch val_pred");
            e.val_cohesion = need_double(ss, "epoch val_gc");
            ckpt.history.epochs.push_back(e);
        } else if (key == "best_epoch") ss >> ckpt.history.best_epoch;
        else if (key == "zero_norm_rows") ss >> ckpt.history.zero_norm_rows;
        else if (key == "param") {
            std::string name;
            int rows = 0, cols = 0;
            ss >> name >> rows >> cols;
            if (name.empty() || rows <= 0 || cols <= 0)
                throw std::runtime_error("checkpoint: bad param header '" + line + "'");
            Matrix2D m(rows, cols);
            for (int i = 0; i < rows; ++i) {
                if (!std::getline(in, line))
                    throw std::runtime_error("checkpoint: truncated param '" + name + "'");
                std::istringstream row(line);
                for (int j = 0; j < cols; ++j) m(i, j) = need_double(row, "param entry");
            }
            ckpt.params.store.insert(name, std::move(m));
        } else {
            throw std::runtime_error("checkpoint: unknown key '" + key + "'");
        }
    }
    if (!saw_end) throw std::runtime_error("'" + path + "': truncated checkpoint");
    ckpt.config.model = mc;
    return ckpt;
}

}  // namespace pmgc
