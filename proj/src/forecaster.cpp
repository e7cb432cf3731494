#include "pmgc/forecaster.hpp"

#include <stdexcept>

#include "pmgc/rng.hpp"

namespace pmgc {

AblationMode parse_mode(const std::string& name) {
    if (name == "full") return AblationMode::Full;
    if (name == "wo-dynamic") return AblationMode::WithoutDynamic;
    if (name == "wo-static") return AblationMode::WithoutStatic;
    if (name == "wo-prospective") return AblationMode::WithoutProspective;
    if (name == "static-avg") return AblationMode::StaticDynamicAverage;
    if (name == "simple-gc") return AblationMode::SimpleCohesion;
    throw std::invalid_argument(
        "unknown mode '" + name +
        "' (expected full|wo-dynamic|wo-static|wo-prospective|static-avg|simple-gc)");
}

std::string mode_name(AblationMode mode) {
    switch (mode) {
        case AblationMode::Full: return "full";
        case AblationMode::WithoutDynamic: return "wo-dynamic";
        case AblationMode::WithoutStatic: return "wo-static";
        case AblationMode::WithoutProspective: return "wo-prospective";
        case AblationMode::StaticDynamicAverage: return "static-avg";
        case AblationMode::SimpleCohesion: return "simple-gc";
    }
    throw std::invalid_argument("unknown mode value");
}

void ModelConfig::validate() const {
    if (w <= 0 || d <= 0 || k <= 0) throw std::invalid_argument("ModelConfig: w, d, k must be positive");
    if (p <= 0 || p >= w) throw std::invalid_argument("ModelConfig: need 0 < p < w");
    if (beta < 0.0 || beta > 1.0) throw std::invalid_argument("ModelConfig: beta must be in [0,1]");
    if (tau <= 0.0) throw std::invalid_argument("ModelConfig: tau must be positive");
    if (lambda < 0.0) throw std::invalid_argument("ModelConfig: lambda must be non-negative");
}

ModelParams init_model_params(int n, const ModelConfig& config, std::uint64_t seed) {
    config.validate();
    if (n <= 0) throw std::invalid_argument("init_model_params: need at least one channel");
    const int kd = config.k * config.d;
    ModelParams mp;
    mp.n = n;
    mp.config = config;
    auto glorot = [&](const std::string& name, int r, int c) {
        mp.store.insert(name, seeded_init(seed_for(seed, name), r, c, InitScheme::GlorotUniform));
    };
    auto zeros = [&](const std::string& name, int r, int c) {
        mp.store.insert(name, Matrix2D(r, c));
    };
    glorot("encoder.w1", config.w, kd);
    zeros("encoder.b1", 1, kd);
    glorot("encoder.w2", kd, kd);
    zeros("encoder.b2", 1, kd);
    glorot("context.w", config.context_len(), config.d);
    zeros("context.b", 1, config.d);
    glorot("gnn.w1", config.d, config.d);
    glorot("gnn.w2", config.d, config.d);
    glorot("decoder.w", config.d, config.p);
    zeros("decoder.b", 1, config.p);
    mp.store.insert("xi", seeded_init(seed_for(seed, "xi"), n, config.d, InitScheme::Gaussian));
    return mp;
}

Var ParamLeaves::at(const std::string& name) const {
    auto it = vars.find(name);
    if (it == vars.end()) throw std::invalid_argument("ParamLeaves: unknown name '" + name + "'");
    return it->second;
}

ParamLeaves make_leaves(Tape& tape, const ParamStore& params) {
    ParamLeaves leaves;
    for (const auto& [name, value] : params) leaves.vars.emplace(name, tape.leaf(value));
    return leaves;
}

ParamStore collect_grads(const ParamLeaves& leaves) {
    ParamStore grads;
    for (const auto& [name, var] : leaves.vars) grads.insert(name, var.grad());
    return grads;
}

namespace {

Var propagate(Var a_norm, const ModelConfig& config, Tape& tape) {
    if (config.propagation == Propagation::NormalizedAdjacency) return a_norm;
    return sub(tape.leaf(Matrix2D::identity(a_norm.value().rows)), a_norm);
}

// Two stacked MixHop layers with shared weights; ReLU between them only.
Var gnn_branch(Var s, Var a_norm, Var w1, Var w2, double beta) {
    Var z1 = add(scale(s, beta), scale(matmul(matmul(a_norm, s), w1), 1.0 - beta));
    Var z1r = relu(z1);
    return add(scale(z1r, beta), scale(matmul(matmul(a_norm, z1r), w2), 1.0 - beta));
}

}  // namespace

ForwardResult build_forward(Tape& tape, const WindowSample& sample, const ParamLeaves& leaves,
                            const ModelConfig& config, bool with_loss) {
    config.validate();
    if (sample.full.cols != config.w)
        throw std::invalid_argument("build_forward: window width " +
                                    std::to_string(sample.full.cols) + " != configured " +
                                    std::to_string(config.w));
    if (sample.pred_len != config.p)
        throw std::invalid_argument("build_forward: sample pred_len != configured p");

    ForwardResult out;
    const bool prospective = config.mode != AblationMode::WithoutProspective;
    const Matrix2D graph_input =
        prospective ? sample.full : pad_cols(sample.context(), config.w);

    Var encoded = encode_window(tape, tape.leaf(graph_input), leaves.at("encoder.w1"),
                                leaves.at("encoder.b1"), leaves.at("encoder.w2"),
                                leaves.at("encoder.b2"));
    for (Var head : split_heads(encoded, config.k, config.d))
        out.dynamic_graphs.push_back(generate_graph(tape, head));
    out.static_graph = generate_graph(tape, leaves.at("xi"));

    // S = f_e(C), then one GNN branch per selected graph, shared weights.
    Var s = row_bias_add(matmul(tape.leaf(sample.context()), leaves.at("context.w")),
                         leaves.at("context.b"));
    std::vector<Var> branch_graphs;
    switch (config.mode) {
        case AblationMode::WithoutDynamic:
            branch_graphs.push_back(out.static_graph);
            break;
        case AblationMode::StaticDynamicAverage:
            branch_graphs = out.dynamic_graphs;
            branch_graphs.push_back(out.static_graph);
            break;
        default:
            branch_graphs = out.dynamic_graphs;
    }
    for (Var g : branch_graphs) {
        Var a_norm = propagate(sym_normalize(g), config, tape);
        Var e = gnn_branch(s, a_norm, leaves.at("gnn.w1"), leaves.at("gnn.w2"), config.beta);
        out.branch_predictions.push_back(
            row_bias_add(matmul(e, leaves.at("decoder.w")), leaves.at("decoder.b")));
    }
    out.mean_prediction = mean_of(out.branch_predictions);

    if (with_loss) {
        out.has_loss = true;
        out.prediction_loss = mean_sq(sub(out.mean_prediction, tape.leaf(sample.target())));
        switch (config.mode) {
            case AblationMode::Full:
            case AblationMode::WithoutProspective:
                out.cohesion = cohesion_loss(tape, out.static_graph, out.dynamic_graphs, config.tau);
                break;
            case AblationMode::SimpleCohesion:
                out.cohesion = cohesion_loss_simple(tape, out.static_graph, out.dynamic_graphs);
                break;
            default:
                out.cohesion = tape.leaf(Matrix2D(1, 1));  // ablations without the loss term
        }
        out.total = add(out.prediction_loss, scale(out.cohesion, config.lambda));
    }
    return out;
}

GraphSet build_graphs(const WindowSample& sample, const ModelParams& params, bool prospective,
                      GraphDiagnostics* diag) {
    const ModelConfig& config = params.config;
    const Matrix2D graph_input =
        prospective ? sample.full : pad_cols(sample.context(), config.w);
    HeadRepresentations heads =
        encode_window(graph_input, params.store.at("encoder.w1"), params.store.at("encoder.b1"),
                      params.store.at("encoder.w2"), params.store.at("encoder.b2"), config.k);
    GraphSet graphs;
    for (const Matrix2D& h : heads.heads) graphs.dynamic.push_back(generate_graph(h, diag));
    graphs.static_graph = static_graph(params.store.at("xi"), diag);
    return graphs;
}

Matrix2D normalize_adjacency(const Matrix2D& a) {
    Tape tape;
    return sym_normalize(tape.leaf(a)).value();
}

Matrix2D mixhop_layer(const Matrix2D& z, const Matrix2D& a_norm, const Matrix2D& w, double beta) {
    return add(scale(z, beta), scale(matmul(matmul(a_norm, z), w), 1.0 - beta));
}

ForecastOutput forecast(const WindowSample& sample, const ModelParams& params, AblationMode mode) {
    ModelConfig config = params.config;
    config.mode = mode;
    Tape tape;
    ParamLeaves leaves = make_leaves(tape, params.store);
    ForwardResult fwd = build_forward(tape, sample, leaves, config, /*with_loss=*/false);
    ForecastOutput out;
    for (Var b : fwd.branch_predictions) out.per_graph.push_back(b.value());
    out.mean = fwd.mean_prediction.value();
    for (Var g : fwd.dynamic_graphs) out.graphs.dynamic.push_back(g.value());
    out.graphs.static_graph = fwd.static_graph.value();
    return out;
}

double prediction_loss(const ForecastOutput& out, const Matrix2D& target) {
    if (!out.mean.same_shape(target))
        throw std::invalid_argument("prediction_loss: prediction " + out.mean.shape_str() +
                                    " vs target " + target.shape_str());
    return frob_sq_diff(out.mean, target) / target.size();
}

LossBreakdown total_loss(const WindowSample& sample, const ModelParams& params,
                         const ModelConfig& config) {
    return total_loss_with_grads(sample, params, config, nullptr);
}

LossBreakdown total_loss_with_grads(const WindowSample& sample, const ModelParams& params,
                                    const ModelConfig& config, ParamStore* grads,
                                    std::int64_t* zero_norm_rows) {
    Tape tape;
    ParamLeaves leaves = make_leaves(tape, params.store);
    ForwardResult fwd = build_forward(tape, sample, leaves, config, /*with_loss=*/true);
    LossBreakdown breakdown;
    breakdown.total = fwd.total.value()(0, 0);
    breakdown.prediction = fwd.prediction_loss.value()(0, 0);
    breakdown.cohesion = fwd.cohesion.value()(0, 0);
    if (grads) {
        tape.backward(fwd.total);
        *grads = collect_grads(leaves);
    }
    if (zero_norm_rows) *zero_norm_rows += tape.zero_norm_rows();
    return breakdown;
}

}  // namespace pmgc
