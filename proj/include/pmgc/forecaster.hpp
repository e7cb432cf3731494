#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pmgc/graph_learning.hpp"
#include "pmgc/optimizer.hpp"
#include "pmgc/window.hpp"

namespace pmgc {

// Fig. 2 ablation variants, selectable at train and score time.
enum class AblationMode {
    Full,                  // k prospective dynamic graphs + cohesion loss
    WithoutDynamic,        // predictions from the static graph only
    WithoutStatic,         // dynamic graphs only, no cohesion loss
    WithoutProspective,    // dynamic graphs from the zero-padded context
    StaticDynamicAverage,  // static branch averaged in, no cohesion loss
    SimpleCohesion,        // full model with the simplified cohesion loss
};

AblationMode parse_mode(const std::string& name);  // throws on unknown mode
std::string mode_name(AblationMode mode);

enum class Propagation {
    NormalizedAdjacency,  // D^{-1/2} A D^{-1/2}
    Laplacian,            // I - D^{-1/2} A D^{-1/2}
};

struct ModelConfig {
    int w = 40;   // window width
    int p = 5;    // prediction width
    int d = 64;   // head / hidden dimension
    int k = 5;    // number of dynamic graphs
    double beta = 0.05;
    double tau = 1.0;
    double lambda = 1e-5;
    AblationMode mode = AblationMode::Full;
    Propagation propagation = Propagation::NormalizedAdjacency;

    int context_len() const { return w - p; }
    void validate() const;  // throws on inconsistent fields
};

// All learnable parameters keyed by canonical names (see init_model_params).
struct ModelParams {
    int n = 0;  // channel count
    ModelConfig config;
    ParamStore store;
};

// Glorot-uniform weights, zero biases, N(0, 0.1) node embeddings xi; each
// matrix drawn from its own seed stream so layouts stay stable.
ModelParams init_model_params(int n, const ModelConfig& config, std::uint64_t seed);

struct ForecastOutput {
    std::vector<Matrix2D> per_graph;  // predictions per branch, each N x p
    Matrix2D mean;                    // N x p
    GraphSet graphs;
};

struct LossBreakdown {
    double total = 0.0;
    double prediction = 0.0;
    double cohesion = 0.0;
};

// --- tape-side forward ------------------------------------------------------

struct ParamLeaves {
    std::map<std::string, Var> vars;
    Var at(const std::string& name) const;
};

ParamLeaves make_leaves(Tape& tape, const ParamStore& params);

// Gradients for every leaf after tape.backward(), keyed like the store.
ParamStore collect_grads(const ParamLeaves& leaves);

struct ForwardResult {
    std::vector<Var> dynamic_graphs;
    Var static_graph;
    std::vector<Var> branch_predictions;
    Var mean_prediction;
    bool has_loss = false;
    Var prediction_loss;
    Var cohesion;  // 0-leaf for modes without a cohesion term
    Var total;
};

// Builds the whole differentiable pipeline for one sample:
//   S = f_e(context); per graph, two MixHop layers (ReLU between) with shared
//   weights over the normalized adjacency; decode; average; losses.
ForwardResult build_forward(Tape& tape, const WindowSample& sample, const ParamLeaves& leaves,
                            const ModelConfig& config, bool with_loss = true);

// --- plain operations -------------------------------------------------------

GraphSet build_graphs(const WindowSample& sample, const ModelParams& params, bool prospective,
                      GraphDiagnostics* diag = nullptr);

Matrix2D normalize_adjacency(const Matrix2D& a);
Matrix2D mixhop_layer(const Matrix2D& z, const Matrix2D& a_norm, const Matrix2D& w, double beta);

ForecastOutput forecast(const WindowSample& sample, const ModelParams& params, AblationMode mode);

double prediction_loss(const ForecastOutput& out, const Matrix2D& target);

LossBreakdown total_loss(const WindowSample& sample, const ModelParams& params,
                         const ModelConfig& config);

// total_loss plus parameter gradients from one backward pass.
LossBreakdown total_loss_with_grads(const WindowSample& sample, const ModelParams& params,
                                    const ModelConfig& config, ParamStore* grads,
                                    std::int64_t* zero_norm_rows = nullptr);

}  // namespace pmgc
