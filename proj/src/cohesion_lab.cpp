#include "pmgc/cohesion_lab.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "pmgc/autodiff.hpp"
#include "pmgc/graph_learning.hpp"
#include "pmgc/optimizer.hpp"
#include "pmgc/rng.hpp"

namespace pmgc {

double uniform_case_loss(int k) {
    if (k < 1) throw std::invalid_argument("uniform_case_loss: k must be >= 1");
    return k * std::log(static_cast<double>(k));
}

double homogeneous_case_loss(int k, double c) {
    if (k < 2) throw std::invalid_argument("homogeneous_case_loss: k must be >= 2");
    if (c < 0.0) throw std::invalid_argument("homogeneous_case_loss: c must be >= 0");
    return k * std::log(1.0 + (k - 1) * std::exp(c * c));
}

namespace {

std::string dyn_name(int sample, int graph) {
    return "s" + std::to_string(sample) + ".g" + std::to_string(graph);
}

Var graph_from_param(Tape& tape, Var param, LabParameterization parameterization) {
    if (parameterization == LabParameterization::Cosine) return generate_graph(tape, param);
    return clamp01(symmetrize(param));
}

}  // namespace

LabReport run_lab(const LabConfig& config) {
    if (config.steps < 1) throw std::invalid_argument("run_lab: steps must be >= 1");
    if (config.k < 2) throw std::invalid_argument("run_lab: k must be >= 2");
    if (config.samples < 1) throw std::invalid_argument("run_lab: samples must be >= 1");
    if (config.tau <= 0.0) throw std::invalid_argument("run_lab: tau must be positive");

    const bool cosine = config.parameterization == LabParameterization::Cosine;
    const int rows = config.n;
    const int cols = cosine ? config.d : config.n;

    ParamStore params;
    params.insert("xi", seeded_init(seed_for(config.seed, "lab.xi"), rows, cols,
                                    InitScheme::Gaussian));
    for (int s = 0; s < config.samples; ++s)
        for (int g = 0; g < config.k; ++g) {
            const std::string name = dyn_name(s, g);
            params.insert(name, config.uniform_init
                                    ? params.at("xi")
                                    : seeded_init(seed_for(config.seed, "lab." + name), rows, cols,
                                                  InitScheme::Gaussian));
        }

    AdamState adam(params, AdamConfig{config.learning_rate, 0.9, 0.999, 1e-8});
    LabReport report;
    report.uniform_reference = uniform_case_loss(config.k);
    report.loss_trajectory.reserve(config.steps);

    // Sum of per-sample losses on one tape; leaves reported for gradient
    // readout when requested.
    auto forward = [&](Tape& tape, std::map<std::string, Var>* leaves, Var* static_out) {
        Var xi_leaf = tape.leaf(params.at("xi"));
        if (leaves) leaves->emplace("xi", xi_leaf);
        Var static_g = graph_from_param(tape, xi_leaf, config.parameterization);
        if (static_out) *static_out = static_g;
        Var total = tape.leaf(Matrix2D(1, 1));
        for (int s = 0; s < config.samples; ++s) {
            std::vector<Var> dyn;
            for (int g = 0; g < config.k; ++g) {
                const std::string name = dyn_name(s, g);
                Var leaf = tape.leaf(params.at(name));
                if (leaves) leaves->emplace(name, leaf);
                dyn.push_back(graph_from_param(tape, leaf, config.parameterization));
            }
            Var sample_loss = config.loss_kind == LabLossKind::Full
                                  ? cohesion_loss(tape, static_g, dyn, config.tau)
                                  : cohesion_loss_simple(tape, static_g, dyn);
            total = add(total, sample_loss);
        }
        return total;
    };

    double prev_mean = std::numeric_limits<double>::infinity();
    for (int step = 0; step < config.steps; ++step) {
        Tape tape;
        std::map<std::string, Var> leaves;
        Var total = forward(tape, &leaves, nullptr);

        const double mean_loss = total.value()(0, 0) / config.samples;
        if (!std::isfinite(mean_loss)) {
            report.diverged = true;
            break;
        }
        if (mean_loss > prev_mean) ++report.loss_increase_steps;
        prev_mean = mean_loss;
        report.loss_trajectory.push_back(mean_loss);

        tape.backward(total);
        ParamStore grads;
        for (const auto& [name, leaf] : leaves) grads.insert(name, leaf.grad());
        try {
            adam.step(params, grads);
        } catch (const std::runtime_error&) {  // non-finite gradient
            report.diverged = true;
            break;
        }
    }

    // Final evaluation at the optimized parameters.
    Tape tape;
    Var static_var;
    Var total = forward(tape, nullptr, &static_var);
    report.final_loss = total.value()(0, 0) / config.samples;

    const Matrix2D static_m = static_var.value();
    double max_to_static = 0.0;
    double min_pairwise = std::numeric_limits<double>::infinity();
    for (int s = 0; s < config.samples; ++s) {
        Tape eval;
        std::vector<Var> dyn;
        for (int g = 0; g < config.k; ++g)
            dyn.push_back(graph_from_param(eval, eval.leaf(params.at(dyn_name(s, g))),
                                           config.parameterization));
        GraphSet set;
        set.static_graph = static_m;
        for (const Var& v : dyn) set.dynamic.push_back(v.value());
        report.per_sample_final_loss.push_back(config.loss_kind == LabLossKind::Full
                                                   ? cohesion_loss(set, config.tau)
                                                   : cohesion_loss_simple(set));
        for (int g = 0; g < config.k; ++g) {
            max_to_static = std::max(max_to_static, frob_sq_diff(set.dynamic[g], static_m));
            for (int h = g + 1; h < config.k; ++h)
                min_pairwise = std::min(min_pairwise, frob_sq_diff(set.dynamic[g], set.dynamic[h]));
        }
    }
    report.final_max_dist_to_static = max_to_static;
    report.final_min_pairwise_dist = min_pairwise;
    return report;
}

}  // namespace pmgc
