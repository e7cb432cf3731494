#include <cmath>
#include <numeric>

#include <stdexcept>

#include "doctest.h"
#include "pmgc/forecaster.hpp"
#include "pmgc/grad_check.hpp"
#include "pmgc/rng.hpp"

using namespace pmgc;

namespace {

Matrix2D random_matrix(int r, int c, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
    SeededRng rng(seed);
    Matrix2D m(r, c);
    for (double& v : m.data) v = rng.uniform(lo, hi);
    return m;
}

ModelConfig tiny_config() {
    ModelConfig cfg;
    cfg.w = 8;
    cfg.p = 2;
    cfg.d = 3;
    cfg.k = 2;
    return cfg;
}

WindowSample sample_for(const ModelConfig& cfg, int n, std::uint64_t seed) {
    WindowSample s;
    s.full = random_matrix(n, cfg.w, seed);
    s.pred_len = cfg.p;
    s.end_tick = cfg.w - 1;
    return s;
}

}  // namespace

TEST_CASE("mode names round-trip and unknown modes are rejected") {
    for (AblationMode m : {AblationMode::Full, AblationMode::WithoutDynamic,
                           AblationMode::WithoutStatic, AblationMode::WithoutProspective,
                           AblationMode::StaticDynamicAverage, AblationMode::SimpleCohesion})
        CHECK(parse_mode(mode_name(m)) == m);
    CHECK_THROWS_AS(parse_mode("bogus"), std::invalid_argument);
}

TEST_CASE("build_graphs returns k dynamic graphs plus the static graph") {
    ModelConfig cfg = tiny_config();
    ModelParams params = init_model_params(4, cfg, 1);
    WindowSample s = sample_for(cfg, 4, 2);
    GraphSet graphs = build_graphs(s, params, true);
    CHECK(graphs.dynamic.size() == 2);
    CHECK(graphs.static_graph.rows == 4);
}

TEST_CASE("prospective off equals zero-padded target") {
    ModelConfig cfg = tiny_config();
    ModelParams params = init_model_params(3, cfg, 3);
    WindowSample s = sample_for(cfg, 3, 4);
    for (int c = cfg.w - cfg.p; c < cfg.w; ++c)
        for (int r = 0; r < 3; ++r) s.full(r, c) = 0.0;

    GraphSet with = build_graphs(s, params, true);
    GraphSet without = build_graphs(s, params, false);
    for (size_t i = 0; i < with.dynamic.size(); ++i)
        CHECK(max_abs_diff(with.dynamic[i], without.dynamic[i]) == 0.0);
}

TEST_CASE("target values move dynamic graphs only when prospective") {
    ModelConfig cfg = tiny_config();
    ModelParams params = init_model_params(3, cfg, 5);
    WindowSample s = sample_for(cfg, 3, 6);
    WindowSample changed = s;
    changed.full(1, cfg.w - 1) += 2.5;  // target column only

    GraphSet a1 = build_graphs(s, params, true);
    GraphSet a2 = build_graphs(changed, params, true);
    double diff = 0.0;
    for (size_t i = 0; i < a1.dynamic.size(); ++i)
        diff = std::max(diff, max_abs_diff(a1.dynamic[i], a2.dynamic[i]));
    CHECK(diff > 0.0);

    GraphSet b1 = build_graphs(s, params, false);
    GraphSet b2 = build_graphs(changed, params, false);
    for (size_t i = 0; i < b1.dynamic.size(); ++i)
        CHECK(max_abs_diff(b1.dynamic[i], b2.dynamic[i]) == 0.0);
}

TEST_CASE("normalize_adjacency spec examples") {
    CHECK(max_abs_diff(normalize_adjacency(Matrix2D::identity(3)), Matrix2D::identity(3)) == 0.0);
    Matrix2D half = normalize_adjacency(Matrix2D(2, 2, 1.0));
    CHECK(max_abs_diff(half, Matrix2D(2, 2, 0.5)) < 1e-12);
    Matrix2D z(3, 3);
    CHECK(max_abs_diff(normalize_adjacency(z), z) == 0.0);
}

TEST_CASE("mixhop_layer spec examples") {
    Matrix2D z = random_matrix(3, 2, 7);
    Matrix2D a = random_matrix(3, 3, 8, 0.0, 1.0);
    Matrix2D w = random_matrix(2, 2, 9);
    CHECK(max_abs_diff(mixhop_layer(z, a, w, 1.0), z) == 0.0);

    Matrix2D a2 = Matrix2D(2, 2, 0.5);
    Matrix2D z2 = Matrix2D::from_rows({{2}, {0}});
    Matrix2D w2 = Matrix2D(1, 1, 1.0);
    Matrix2D out = mixhop_layer(z2, a2, w2, 0.0);
    CHECK(out(0, 0) == doctest::Approx(1.0));
    CHECK(out(1, 0) == doctest::Approx(1.0));

    // identity graph and weights: convex combination of z with itself
    Matrix2D eye3 = Matrix2D::identity(3);
    Matrix2D eye2 = Matrix2D::identity(2);
    CHECK(max_abs_diff(mixhop_layer(z, eye3, eye2, 0.3), z) < 1e-12);
}

TEST_CASE("mixhop_layer is linear in z") {
    Matrix2D a = random_matrix(4, 4, 10, 0.0, 1.0);
    Matrix2D w = random_matrix(3, 3, 11);
    Matrix2D z1 = random_matrix(4, 3, 12), z2 = random_matrix(4, 3, 13);
    const double alpha = 0.7, beta_c = -1.3;
    Matrix2D lhs = mixhop_layer(add(scale(z1, alpha), scale(z2, beta_c)), a, w, 0.05);
    Matrix2D rhs = add(scale(mixhop_layer(z1, a, w, 0.05), alpha),
                       scale(mixhop_layer(z2, a, w, 0.05), beta_c));
    CHECK(max_abs_diff(lhs, rhs) < 1e-10);
}

TEST_CASE("identical dynamic graphs give identical branch predictions") {
    // Zero first encoder layer: every head equals the bias-driven constant,
    // so all k graphs coincide and shared weights must agree exactly.
    ModelConfig cfg = tiny_config();
    ModelParams params = init_model_params(3, cfg, 14);
    params.store.at("encoder.w1") = Matrix2D(cfg.w, cfg.k * cfg.d);
    params.store.at("encoder.b1") = Matrix2D(1, cfg.k * cfg.d, 0.5);
    params.store.at("encoder.w2") = Matrix2D(cfg.k * cfg.d, cfg.k * cfg.d);
    Matrix2D b2(1, cfg.k * cfg.d);
    for (int j = 0; j < cfg.d; ++j) b2(0, j) = b2(0, cfg.d + j) = 0.3 + 0.1 * j;
    params.store.at("encoder.b2") = b2;

    WindowSample s = sample_for(cfg, 3, 15);
    ForecastOutput out = forecast(s, params, AblationMode::Full);
    REQUIRE(out.per_graph.size() == 2);
    CHECK(max_abs_diff(out.per_graph[0], out.per_graph[1]) == 0.0);
    CHECK(max_abs_diff(out.per_graph[0], out.mean) < 1e-15);
}

TEST_CASE("zero decoder gives zero predictions") {
    ModelConfig cfg = tiny_config();
    ModelParams params = init_model_params(3, cfg, 16);
    params.store.at("decoder.w") = Matrix2D(cfg.d, cfg.p);
    params.store.at("decoder.b") = Matrix2D(1, cfg.p);
    ForecastOutput out = forecast(sample_for(cfg, 3, 17), params, AblationMode::Full);
    CHECK(sum_sq(out.mean) == 0.0);
}

TEST_CASE("wo-dynamic equals full when every graph coincides") {
    ModelConfig cfg = tiny_config();
    cfg.k = 1;
    ModelParams params = init_model_params(3, cfg, 18);
    // Constant encoder output row equal across channels -> all-ones dynamic
    // graph; xi rows equal -> all-ones static graph.
    params.store.at("encoder.w1") = Matrix2D(cfg.w, cfg.k * cfg.d);
    params.store.at("encoder.b1") = Matrix2D(1, cfg.k * cfg.d, 0.4);
    params.store.at("encoder.w2") = Matrix2D(cfg.k * cfg.d, cfg.k * cfg.d);
    params.store.at("encoder.b2") = Matrix2D(1, cfg.k * cfg.d, 0.2);
    Matrix2D xi(3, cfg.d);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < cfg.d; ++j) xi(i, j) = 0.1 * (j + 1);
    params.store.at("xi") = xi;

    WindowSample s = sample_for(cfg, 3, 19);
    ForecastOutput full = forecast(s, params, AblationMode::Full);
    ForecastOutput stat = forecast(s, params, AblationMode::WithoutDynamic);
    CHECK(max_abs_diff(full.mean, stat.mean) < 1e-12);
}

TEST_CASE("static-avg mode averages k+1 branches") {
    ModelConfig cfg = tiny_config();
    ModelParams params = init_model_params(3, cfg, 20);
    ForecastOutput out = forecast(sample_for(cfg, 3, 21), params, AblationMode::StaticDynamicAverage);
    CHECK(out.per_graph.size() == cfg.k + 1);
    Matrix2D manual(out.mean.rows, out.mean.cols);
    for (const Matrix2D& b : out.per_graph) manual = add(manual, b);
    manual = scale(manual, 1.0 / out.per_graph.size());
    CHECK(max_abs_diff(manual, out.mean) < 1e-12);
}

TEST_CASE("prediction_loss spec examples") {
    ForecastOutput out;
    out.mean = Matrix2D(2, 2);
    Matrix2D target(2, 2, 1.0);
    CHECK(prediction_loss(out, target) == doctest::Approx(1.0));
    CHECK(prediction_loss(out, Matrix2D(2, 2)) == 0.0);
    CHECK_THROWS_AS(prediction_loss(out, Matrix2D(3, 2)), std::invalid_argument);
}

TEST_CASE("total_loss composes prediction and cohesion") {
    ModelConfig cfg = tiny_config();
    ModelParams params = init_model_params(4, cfg, 22);
    WindowSample s = sample_for(cfg, 4, 23);

    ModelConfig no_gc = cfg;
    no_gc.lambda = 0.0;
    LossBreakdown b0 = total_loss(s, params, no_gc);
    CHECK(b0.total == doctest::Approx(b0.prediction).epsilon(1e-15));

    ModelConfig weighted = cfg;
    weighted.lambda = 1e-5;
    LossBreakdown b1 = total_loss(s, params, weighted);
    CHECK(b1.total == doctest::Approx(b1.prediction + 1e-5 * b1.cohesion).epsilon(1e-15));
    CHECK(b1.total >= 0.0);
    CHECK(b1.cohesion >= 0.0);
}

TEST_CASE("channel permutation equivariance") {
    ModelConfig cfg = tiny_config();
    const int n = 5;
    ModelParams params = init_model_params(n, cfg, 24);
    WindowSample s = sample_for(cfg, n, 25);

    std::vector<int> perm{3, 0, 4, 1, 2};
    WindowSample ps = s;
    Matrix2D pxi(n, cfg.d);
    const Matrix2D& xi = params.store.at("xi");
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < cfg.w; ++j) ps.full(i, j) = s.full(perm[i], j);
        for (int j = 0; j < cfg.d; ++j) pxi(i, j) = xi(perm[i], j);
    }
    ModelParams pparams = params;
    pparams.store.at("xi") = pxi;

    ForecastOutput base = forecast(s, params, AblationMode::Full);
    ForecastOutput permuted = forecast(ps, pparams, AblationMode::Full);

    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < cfg.p; ++j)
            CHECK(permuted.mean(i, j) == doctest::Approx(base.mean(perm[i], j)).epsilon(1e-9));
        for (int j = 0; j < n; ++j)
            CHECK(permuted.graphs.static_graph(i, j) ==
                  doctest::Approx(base.graphs.static_graph(perm[i], perm[j])).epsilon(1e-9));
    }
    for (size_t g = 0; g < base.graphs.dynamic.size(); ++g)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                CHECK(permuted.graphs.dynamic[g](i, j) ==
                      doctest::Approx(base.graphs.dynamic[g](perm[i], perm[j])).epsilon(1e-9));
}

TEST_CASE("full-loss gradient check on the tiny config") {
    ModelConfig cfg = tiny_config();
    cfg.lambda = 1e-2;  // larger weight so the cohesion path is exercised hard
    const int n = 3;
    ModelParams params = init_model_params(n, cfg, 26);
    WindowSample s = sample_for(cfg, n, 27);

    auto loss = [&](const ParamStore& p) {
        Tape tape;
        ParamLeaves leaves = make_leaves(tape, p);
        ForwardResult fwd = build_forward(tape, s, leaves, cfg, true);
        return LossProbe{fwd.total.value()(0, 0), tape.min_kink_gap()};
    };
    auto grad = [&](const ParamStore& p) {
        Tape tape;
        ParamLeaves leaves = make_leaves(tape, p);
        ForwardResult fwd = build_forward(tape, s, leaves, cfg, true);
        tape.backward(fwd.total);
        return collect_grads(leaves);
    };
    GradCheckReport report = grad_check(loss, grad, params.store, 1e-4);
    CHECK(report.max_rel_error < 1e-3);
    CHECK(report.total_entries > 100);
}

TEST_CASE("laplacian propagation switch changes the operator as documented") {
    ModelConfig cfg = tiny_config();
    cfg.propagation = Propagation::Laplacian;
    ModelParams params = init_model_params(3, cfg, 28);
    WindowSample s = sample_for(cfg, 3, 29);
    ForecastOutput lap = forecast(s, params, AblationMode::Full);

    params.config.propagation = Propagation::NormalizedAdjacency;
    ForecastOutput adj = forecast(s, params, AblationMode::Full);
    CHECK(max_abs_diff(lap.mean, adj.mean) > 0.0);
}
