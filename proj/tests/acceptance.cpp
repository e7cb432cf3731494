// Acceptance suite: one line per criterion, nonzero exit on any failure.
// argv[1] must be the path to the pmgc CLI binary (used by the determinism
// criterion); everything else runs in-process against the library.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "pmgc/cohesion_lab.hpp"
#include "pmgc/data_pipeline.hpp"
#include "pmgc/forecaster.hpp"
#include "pmgc/grad_check.hpp"
#include "pmgc/metrics.hpp"
#include "pmgc/rng.hpp"
#include "pmgc/scoring.hpp"
#include "pmgc/trainer.hpp"

using namespace pmgc;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& what, const std::string& detail) {
    std::cout << (pass ? "[PASS]" : "[FAIL]") << " criterion " << criterion << ": " << what
              << " -- " << detail << std::endl;
    if (!pass) ++g_failures;
}

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) { return format_double(v); }

// ---------------------------------------------------------------------------
// 1. Gradient correctness of the full loss on the pinned tiny configuration.
void criterion_gradients() {
    const auto start = Clock::now();
    ModelConfig cfg;
    cfg.w = 12;
    cfg.p = 3;
    cfg.d = 8;
    cfg.k = 2;
    cfg.tau = 1.0;
    cfg.lambda = 1e-5;
    const int n = 4;
    ModelParams params = init_model_params(n, cfg, 12345);

    SeededRng rng(777);
    WindowSample sample;
    sample.full = Matrix2D(n, cfg.w);
    for (double& v : sample.full.data) v = rng.uniform(0.0, 1.0);
    sample.pred_len = cfg.p;
    sample.end_tick = cfg.w - 1;

    auto loss = [&](const ParamStore& p) {
        Tape tape;
        ParamLeaves leaves = make_leaves(tape, p);
        ForwardResult fwd = build_forward(tape, sample, leaves, cfg, true);
        return LossProbe{fwd.total.value()(0, 0), tape.min_kink_gap()};
    };
    auto grad = [&](const ParamStore& p) {
        Tape tape;
        ParamLeaves leaves = make_leaves(tape, p);
        ForwardResult fwd = build_forward(tape, sample, leaves, cfg, true);
        tape.backward(fwd.total);
        return collect_grads(leaves);
    };
    const GradCheckReport r = grad_check(loss, grad, params.store, 1e-4, 1e-6, 9);
    const double elapsed = seconds_since(start);
    report(1, r.max_rel_error < 1e-3 && elapsed < 30.0,
           "analytic gradients match central differences on (N=4,w=12,p=3,d=8,k=2)",
           "max rel err " + fmt(r.max_rel_error) + " over " + std::to_string(r.total_entries) +
               " entries (" + std::to_string(r.excluded_entries) + " kink-excluded), " +
               fmt(elapsed) + " s");
}

// ---------------------------------------------------------------------------
// 2. The simplified loss collapses dynamic graphs onto the static graph.
// 3. The contrastive loss does not, and keeps them mutually distinct.
void criteria_cohesion_behavior() {
    LabConfig base;
    base.k = 3;
    base.n = 5;
    base.d = 4;
    base.steps = 2000;
    base.learning_rate = 1e-2;

    bool collapse_ok = true;
    std::string collapse_detail;
    for (std::uint64_t seed : {1, 2, 3}) {
        LabConfig cfg = base;
        cfg.loss_kind = LabLossKind::Simple;
        cfg.seed = seed;
        const LabReport r = run_lab(cfg);
        const double max_norm = std::sqrt(r.final_max_dist_to_static);
        collapse_ok = collapse_ok && !r.diverged && max_norm < 1e-2;
        collapse_detail += "seed " + std::to_string(seed) + ": max||A-As||_F " + fmt(max_norm) + "; ";
    }
    report(2, collapse_ok, "simple cohesion loss collapses the dynamic graphs", collapse_detail);

    const double klogk = uniform_case_loss(base.k);
    bool full_ok = true;
    std::string full_detail;
    for (std::uint64_t seed : {1, 2, 3}) {
        LabConfig cfg = base;
        cfg.loss_kind = LabLossKind::Full;
        cfg.seed = seed;
        const LabReport r = run_lab(cfg);
        const bool ok =
            !r.diverged && r.final_loss < klogk - 0.1 && r.final_min_pairwise_dist > 0.05;
        full_ok = full_ok && ok;
        full_detail += "seed " + std::to_string(seed) + ": loss " + fmt(r.final_loss) +
                       ", min pair dist " + fmt(r.final_min_pairwise_dist) + "; ";
    }
    {
        LabConfig cfg = base;
        cfg.loss_kind = LabLossKind::Full;
        cfg.uniform_init = true;
        cfg.steps = 1;
        const LabReport r = run_lab(cfg);
        const double start_loss = r.loss_trajectory.front();
        const bool ok = std::abs(start_loss - klogk) < 1e-9;
        full_ok = full_ok && ok;
        full_detail += "uniform start " + fmt(start_loss) + " vs k log k " + fmt(klogk);
    }
    report(3, full_ok, "full cohesion loss beats the uniform case and keeps diversity",
           full_detail);
}

// ---------------------------------------------------------------------------
// 4. Closed-form cross-checks of the loss at constructed configurations.
void criterion_closed_forms() {
    bool ok = true;
    std::string detail;
    double worst = 0.0;
    for (int k : {2, 3, 5}) {
        for (double c : {0.0, 0.5, 1.0}) {
            Matrix2D base = Matrix2D::identity(4);
            Matrix2D shifted = base;
            shifted(0, 0) += c;  // ||shifted - base||_F = c exactly
            GraphSet set;
            set.static_graph = base;
            for (int i = 0; i < k; ++i) set.dynamic.push_back(shifted);
            const double direct = cohesion_loss(set, 1.0);
            const double closed = c == 0.0 ? uniform_case_loss(k) : homogeneous_case_loss(k, c);
            worst = std::max(worst, std::abs(direct - closed));
            if (std::abs(direct - closed) >= 1e-9) {
                ok = false;
                detail += "k=" + std::to_string(k) + ",c=" + fmt(c) + " off by " +
                          fmt(std::abs(direct - closed)) + "; ";
            }
        }
    }
    report(4, ok, "direct loss evaluation matches the closed forms (k in {2,3,5}, c in {0,.5,1})",
           ok ? "max deviation " + fmt(worst) : detail);
}

// ---------------------------------------------------------------------------
// 5. best_f1 equals exhaustive threshold search.
void criterion_metric_oracle() {
    SeededRng rng(2024);
    int mismatches = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const int len = 50;
        std::vector<double> scores(len);
        std::vector<int> labels(len);
        for (int i = 0; i < len; ++i) {
            scores[i] = std::floor(rng.uniform(0.0, 12.0)) / 4.0;  // ties on purpose
            labels[i] = rng.uniform() < 0.25 ? 1 : 0;
        }
        for (MetricKind kind : {MetricKind::Pointwise, MetricKind::Composite}) {
            std::vector<double> thresholds = scores;
            thresholds.push_back(*std::min_element(scores.begin(), scores.end()) - 1.0);
            double brute = -1.0;
            for (double t : thresholds)
                brute = std::max(brute, f1_at_threshold(scores, labels, t, kind));
            if (best_f1(scores, labels, kind).value != brute) ++mismatches;
        }
    }
    report(5, mismatches == 0, "best_f1 equals brute-force threshold search (200 instances)",
           std::to_string(mismatches) + " mismatches");
}

// ---------------------------------------------------------------------------
// Shared pipeline: synthesize, train, score, evaluate one seed.
struct PipelineResult {
    double best_pointwise = 0.0;
    double best_composite = 0.0;
};

PipelineResult run_pipeline(const SynthSpec& spec, TrainConfig config, AblationMode mode) {
    config.model.mode = mode;
    const SynthData data = synth_generate(spec);
    const NormalizationStats stats = compute_stats(data.train);
    const RawSeries train_norm = normalize_channels(data.train, stats);
    const RawSeries test_norm = normalize_channels(data.test, stats);

    const auto windows = make_windows(train_norm, config.model.w, config.model.p);
    auto [params, history] = train(windows, config);

    const ErrorMatrix errors = forecast_errors(test_norm.values, params);
    const ScoreSeries scores = normalize_and_aggregate(errors, robust_stats(errors));
    const std::vector<int> labels(data.test.labels.begin() + scores.first_tick,
                                  data.test.labels.end());

    PipelineResult r;
    r.best_pointwise = best_f1(scores.scores, labels, MetricKind::Pointwise).value;
    r.best_composite = best_f1(scores.scores, labels, MetricKind::Composite).value;
    return r;
}

// 6. Synthetic end-to-end spike detection at paper hyperparameters.
void criterion_end_to_end() {
    const auto start = Clock::now();
    SynthSpec spec;
    spec.channels = 8;
    spec.train_ticks = 2000;
    spec.test_ticks = 1000;
    spec.latents = 3;
    spec.noise_std = 0.05;
    for (int i = 0; i < 10; ++i)
        spec.anomalies.push_back({AnomalyType::Spike, 60 + 95 * i, 1, 8.0});  // >= 6 sigma

    TrainConfig config;
    config.model.w = 40;
    config.model.p = 5;
    config.model.d = 16;
    config.model.k = 5;
    config.model.lambda = 1e-5;
    config.epochs = 10;
    config.learning_rate = 1e-3;
    config.batch_size = 32;

    double sum_f1 = 0.0;
    std::string detail;
    for (std::uint64_t seed : {1, 2, 3}) {
        spec.seed = seed;
        config.seed = seed;
        const PipelineResult r = run_pipeline(spec, config, AblationMode::Full);
        sum_f1 += r.best_pointwise;
        detail += "seed " + std::to_string(seed) + ": F1p " + fmt(r.best_pointwise) + "; ";
    }
    const double mean_f1 = sum_f1 / 3.0;
    const double elapsed = seconds_since(start);
    detail += "mean " + fmt(mean_f1) + ", " + fmt(elapsed) + " s";
    report(6, mean_f1 >= 0.8 && elapsed < 300.0,
           "spike detection: mean best pointwise F1 >= 0.8 within 5 minutes", detail);
}

// 7. Prospective graphing helps (or at least does not hurt) on correlation
//    breaks in most seeds; all values reported.
void criterion_prospective() {
    SynthSpec spec;
    spec.channels = 6;
    spec.train_ticks = 1200;
    spec.test_ticks = 800;
    spec.latents = 3;
    spec.noise_std = 0.05;
    for (int i = 0; i < 10; ++i)
        spec.anomalies.push_back({AnomalyType::CorrelationBreak, 50 + 70 * i, 20, 1.0});

    TrainConfig config;
    config.model.w = 30;
    config.model.p = 5;
    config.model.d = 8;
    config.model.k = 3;
    config.model.lambda = 1e-5;
    config.epochs = 8;
    config.learning_rate = 1e-3;

    int wins = 0;
    std::string detail;
    for (std::uint64_t seed : {1, 2, 3}) {
        spec.seed = seed;
        config.seed = seed;
        const PipelineResult full = run_pipeline(spec, config, AblationMode::Full);
        const PipelineResult ablated = run_pipeline(spec, config, AblationMode::WithoutProspective);
        if (full.best_composite >= ablated.best_composite) ++wins;
        detail += "seed " + std::to_string(seed) + ": full F1c " + fmt(full.best_composite) +
                  " vs w/o prospective " + fmt(ablated.best_composite) + "; ";
    }
    report(7, wins >= 2, "prospective graphing >= ablation on F1-composite in 2 of 3 seeds",
           detail + std::to_string(wins) + "/3 seeds");
}

// ---------------------------------------------------------------------------
// 8. CLI determinism: byte-identical checkpoints and score files.
std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

int run_cli(const std::string& cmd_line) {
    const int status = std::system(cmd_line.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void criterion_determinism(const std::string& cli) {
    if (cli.empty()) {
        report(8, false, "CLI determinism", "no CLI path supplied on the command line");
        return;
    }
    const fs::path dir = fs::temp_directory_path() / "pmgc_acceptance_determinism";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string d = dir.string();

    std::ofstream spec(d + "/spec.txt");
    spec << "channels = 4\ntrain_ticks = 300\ntest_ticks = 200\nseed = 11\nlatents = 2\n"
         << "noise_std = 0.05\nanomaly = spike, 80, 1, 8\n";
    spec.close();

    bool ok = run_cli(cli + " synth --spec " + d + "/spec.txt --out " + d + " > /dev/null") == 0;
    const std::string train_cmd = cli + " train --train " + d + "/train.csv --epochs 2" +
                                  " --window 16 --pred-window 4 --k 2 --d 4 --seed 7 --out ";
    ok = ok && run_cli(train_cmd + d + "/m1.ckpt > /dev/null") == 0;
    ok = ok && run_cli(train_cmd + d + "/m2.ckpt > /dev/null") == 0;
    const bool ckpt_same = ok && slurp(d + "/m1.ckpt") == slurp(d + "/m2.ckpt") &&
                           !slurp(d + "/m1.ckpt").empty();

    const std::string score_cmd =
        cli + " score --model " + d + "/m1.ckpt --test " + d + "/test.csv --out ";
    ok = ok && run_cli(score_cmd + d + "/s1.txt > /dev/null") == 0;
    ok = ok && run_cli(score_cmd + d + "/s2.txt > /dev/null") == 0;
    const bool score_same = ok && slurp(d + "/s1.txt") == slurp(d + "/s2.txt") &&
                            !slurp(d + "/s1.txt").empty();

    report(8, ok && ckpt_same && score_same, "identical reruns produce byte-identical artifacts",
           std::string("checkpoints ") + (ckpt_same ? "match" : "differ") + ", score files " +
               (score_same ? "match" : "differ"));
    fs::remove_all(dir);
}

// ---------------------------------------------------------------------------
// 9. Scoring invariants as randomized property checks.
void criterion_scoring_invariants() {
    SeededRng rng(555);
    int affine_bad = 0, dominance_bad = 0, window_bad = 0;

    for (int trial = 0; trial < 100; ++trial) {
        const int ticks = 20 + static_cast<int>(rng.next_u64() % 30);
        ErrorMatrix e;
        e.err = Matrix2D(1, ticks);
        for (double& v : e.err.data) v = rng.uniform(0.0, 4.0);
        ErrorMatrix scaled = e;
        const double s = rng.uniform(0.1, 10.0);
        const double c = rng.uniform(0.0, 2.0);
        for (double& v : scaled.err.data) v = s * v + c;
        const ScoreSeries s1 = normalize_and_aggregate(e, robust_stats(e));
        const ScoreSeries s2 = normalize_and_aggregate(scaled, robust_stats(scaled));
        for (int i = 0; i < ticks; ++i)
            if (std::abs(s1.scores[i] - s2.scores[i]) >= 1e-9) ++affine_bad;
    }

    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + static_cast<int>(rng.next_u64() % 5);
        const int ticks = 8 + static_cast<int>(rng.next_u64() % 20);
        ErrorMatrix e;
        e.err = Matrix2D(n, ticks);
        for (double& v : e.err.data) v = rng.uniform(0.0, 3.0);
        const RobustStats stats = robust_stats(e);
        const ScoreSeries agg = normalize_and_aggregate(e, stats);
        for (int t = 0; t < ticks; ++t)
            for (int ch = 0; ch < n; ++ch) {
                const double per =
                    (e.err(ch, t) - stats.median[ch]) / std::max(stats.iqr[ch], 1e-6);
                if (agg.scores[t] < per - 1e-12) ++dominance_bad;
            }
    }

    for (int trial = 0; trial < 100; ++trial) {
        const int t = 10 + static_cast<int>(rng.next_u64() % 80);
        const int w = 3 + static_cast<int>(rng.next_u64() % (t - 3));
        const int p = 1 + static_cast<int>(rng.next_u64() % (w - 1));
        RawSeries series;
        series.values = Matrix2D(2, t, 0.5);
        series.channel_names = {"a", "b"};
        if (make_windows(series, w, p).size() != static_cast<size_t>(t - w + 1)) ++window_bad;
    }

    report(9, affine_bad == 0 && dominance_bad == 0 && window_bad == 0,
           "scoring invariants (affine invariance, max dominance, window count)",
           std::to_string(affine_bad) + "/" + std::to_string(dominance_bad) + "/" +
               std::to_string(window_bad) + " violations");
}

}  // namespace

int main(int argc, char** argv) {
    const std::string cli = argc > 1 ? argv[1] : "";
    const auto start = Clock::now();

    try {
        criterion_gradients();
        criteria_cohesion_behavior();
        criterion_closed_forms();
        criterion_metric_oracle();
        criterion_end_to_end();
        criterion_prospective();
        criterion_determinism(cli);
        criterion_scoring_invariants();
    } catch (const std::exception& e) {
        std::cout << "[FAIL] acceptance suite aborted: " << e.what() << std::endl;
        return 1;
    }

    std::cout << (g_failures == 0 ? "all criteria passed" : std::to_string(g_failures) + " criteria failed")
              << " in " << fmt(seconds_since(start)) << " s" << std::endl;
    return g_failures == 0 ? 0 : 1;
}
