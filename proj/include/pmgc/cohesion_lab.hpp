#pragma once

#include <cstdint>
#include <vector>

#include "pmgc/matrix.hpp"

namespace pmgc {

// Direct optimization of the cohesion losses over free graph parameters,
// with no forecasting in the loop. Used to confirm empirically that the
// simplified loss collapses every dynamic graph onto the static one while
// the contrastive loss keeps them diverse.

enum class LabLossKind { Full, Simple };
enum class LabParameterization {
    Cosine,  // graphs generated from free N x d embeddings via f_gen
    Raw,     // graphs are free N x N matrices, symmetrized and clamped to [0,1]
};

struct LabConfig {
    int n = 5;
    int d = 4;
    int k = 3;
    double tau = 1.0;
    LabLossKind loss_kind = LabLossKind::Simple;
    LabParameterization parameterization = LabParameterization::Cosine;
    int steps = 2000;
    double learning_rate = 1e-2;
    std::uint64_t seed = 0;
    int samples = 1;            // independent dynamic-graph sets sharing one static graph
    bool uniform_init = false;  // start every dynamic parameter equal to the static one
};

struct LabReport {
    std::vector<double> loss_trajectory;  // mean per-sample loss per step (before the update)
    double final_loss = 0.0;              // mean per-sample
    std::vector<double> per_sample_final_loss;
    // Distances are squared Frobenius, matching dist(A,B) = ||A-B||_F^2.
    double final_max_dist_to_static = 0.0;   // max over samples and graphs
    double final_min_pairwise_dist = 0.0;    // min over samples and graph pairs
    double uniform_reference = 0.0;          // k log k
    int loss_increase_steps = 0;             // monitored, not asserted
    bool diverged = false;
};

// k log k: the cohesion loss value when every dynamic graph equals the
// static graph (tau = 1).
double uniform_case_loss(int k);

// k log(1 + (k-1) e^{c^2}): the loss when the dynamic graphs are mutually
// identical at Frobenius distance c from the static graph (tau = 1).
double homogeneous_case_loss(int k, double c);

LabReport run_lab(const LabConfig& config);

}  // namespace pmgc
