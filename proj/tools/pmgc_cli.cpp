// pmgc: train / score / evaluate a multi-graph cohesion anomaly detector on
// CSV time series, generate synthetic data, and verify the cohesion-loss
// optimization behavior empirically.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pmgc/cohesion_lab.hpp"
#include "pmgc/data_pipeline.hpp"
#include "pmgc/forecaster.hpp"
#include "pmgc/metrics.hpp"
#include "pmgc/scoring.hpp"
#include "pmgc/trainer.hpp"

namespace {

using namespace pmgc;

struct CommonOpts {
    std::uint64_t seed = 0;
    std::string mode = "full";
};

NormKind parse_norm(const std::string& s) {
    if (s == "minmax") return NormKind::MinMax;
    if (s == "zscore") return NormKind::ZScore;
    throw CLI::ValidationError("--norm", "expected minmax or zscore");
}

std::string trim_ws(const std::string& s) {
    const size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// key = value lines, '#' comments. Keys mirror the long flags without the
// leading dashes; explicit command-line flags win over file values.
void apply_config_file(const std::string& path, CLI::App* cmd) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config '" + path + "'");
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string stripped = trim_ws(line.substr(0, line.find('#')));
        if (stripped.empty()) continue;
        const size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim_ws(stripped.substr(0, eq));
        const std::string value = trim_ws(stripped.substr(eq + 1));
        CLI::Option* opt = nullptr;
        try {
            opt = cmd->get_option("--" + key);
        } catch (const CLI::OptionNotFound&) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": unknown key '" + key +
                                     "'");
        }
        if (opt->count() > 0) continue;  // command line takes precedence
        opt->add_result(value);
        opt->run_callback();
    }
}

int cmd_synth(const std::string& spec_path, const std::string& out_dir) {
    const SynthSpec spec = parse_synth_spec(spec_path);
    const SynthData data = synth_generate(spec);
    std::filesystem::create_directories(out_dir);
    const std::string train_path = out_dir + "/train.csv";
    const std::string test_path = out_dir + "/test.csv";
    write_csv(train_path, data.train);
    write_csv(test_path, data.test);
    std::cout << "wrote " << train_path << " (" << data.train.ticks() << " ticks) and " << test_path
              << " (" << data.test.ticks() << " ticks, "
              << std::count(data.test.labels.begin(), data.test.labels.end(), 1)
              << " anomalous)\n";
    return 0;
}

int cmd_train(const std::string& train_csv, const std::string& out_path, TrainConfig config,
              const std::string& norm, int downsample, MissingPolicy missing) {
    RawSeries series = load_csv(train_csv, /*has_labels=*/csv_has_label_column(train_csv), missing);
    if (downsample > 1) series = median_downsample(series, downsample);
    const NormKind kind = parse_norm(norm);
    const NormalizationStats stats = compute_stats(series);
    const RawSeries normalized = normalize_channels(series, stats, kind);
    const std::vector<WindowSample> windows =
        make_windows(normalized, config.model.w, config.model.p);

    auto [params, history] = train(windows, config);

    std::cout << "epoch  train_loss      val_loss\n";
    for (size_t e = 0; e < history.epochs.size(); ++e) {
        std::cout << e << "  " << format_double(history.epochs[e].train_loss) << "  "
                  << format_double(history.epochs[e].val_loss)
                  << (static_cast<int>(e) == history.best_epoch ? "  *best" : "") << '\n';
    }
    if (history.zero_norm_rows > 0)
        std::cout << "note: " << history.zero_norm_rows
                  << " zero-norm embedding rows hit the cosine guard\n";

    Checkpoint ckpt;
    ckpt.params = std::move(params);
    ckpt.config = config;
    ckpt.history = history;
    ckpt.stats = stats;
    ckpt.norm_kind = kind;
    ckpt.channel_names = series.channel_names;
    save_checkpoint(out_path, ckpt);
    std::cout << "checkpoint written to " << out_path << '\n';
    return 0;
}

int cmd_score(const std::string& ckpt_path, const std::string& test_csv,
              const std::string& out_path, std::optional<double> threshold,
              const std::string& stats_csv, int downsample, MissingPolicy missing) {
    const Checkpoint ckpt = load_checkpoint(ckpt_path);
    RawSeries test = load_csv(test_csv, csv_has_label_column(test_csv), missing);
    if (downsample > 1) test = median_downsample(test, downsample);
    if (test.channels() != ckpt.params.n)
        throw std::runtime_error("channel mismatch: checkpoint expects " +
                                 std::to_string(ckpt.params.n) + ", test series has " +
                                 std::to_string(test.channels()));
    const RawSeries normalized = normalize_channels(test, ckpt.stats, ckpt.norm_kind);

    const ErrorMatrix errors = forecast_errors(normalized.values, ckpt.params);
    RobustStats stats;
    if (stats_csv.empty()) {
        stats = robust_stats(errors);
    } else {
        RawSeries ref = load_csv(stats_csv, csv_has_label_column(stats_csv), missing);
        if (downsample > 1) ref = median_downsample(ref, downsample);
        const RawSeries ref_norm = normalize_channels(ref, ckpt.stats, ckpt.norm_kind);
        stats = robust_stats(forecast_errors(ref_norm.values, ckpt.params));
    }
    ScoreSeries scores = normalize_and_aggregate(errors, stats);
    if (threshold) scores = apply_threshold(std::move(scores), *threshold);
    write_scores(out_path, scores);
    std::cout << "scored " << scores.scores.size() << " ticks -> " << out_path << '\n';
    return 0;
}

int cmd_eval(const std::string& scores_path, const std::string& test_csv,
             const std::string& report_path) {
    const ScoreSeries scores = read_scores(scores_path);
    const RawSeries test = load_csv(test_csv, /*has_labels=*/true);
    if (scores.first_tick < 0 ||
        scores.first_tick + scores.scores.size() > test.labels.size())
        throw std::runtime_error("score ticks [" + std::to_string(scores.first_tick) + ", " +
                                 std::to_string(scores.first_tick + scores.scores.size()) +
                                 ") misaligned with " + std::to_string(test.labels.size()) +
                                 " labels");
    const std::vector<int> labels(test.labels.begin() + scores.first_tick,
                                  test.labels.begin() + scores.first_tick + scores.scores.size());

    std::ostringstream report;
    const bool degenerate = std::count(labels.begin(), labels.end(), 1) == 0;
    if (degenerate)
        report << "warning: no positive labels in the scored region; metrics are 0 by convention\n";
    const BestF1 pw = best_f1(scores.scores, labels, MetricKind::Pointwise);
    const BestF1 comp = best_f1(scores.scores, labels, MetricKind::Composite);
    std::vector<int> pw_preds(scores.scores.size());
    for (size_t i = 0; i < scores.scores.size(); ++i)
        pw_preds[i] = scores.scores[i] > pw.threshold ? 1 : 0;
    const Prf prf = f1_pointwise(pw_preds, labels);
    report << "pointwise: best_f1 " << format_double(pw.value) << " at threshold "
           << format_double(pw.threshold) << " (precision " << format_double(prf.precision)
           << ", recall " << format_double(prf.recall) << ")\n";
    report << "composite: best_f1 " << format_double(comp.value) << " at threshold "
           << format_double(comp.threshold) << '\n';

    std::cout << report.str();
    if (!report_path.empty()) {
        std::ofstream out(report_path);
        if (!out) throw std::runtime_error("cannot write '" + report_path + "'");
        out << report.str();
    }
    return 0;
}

int cmd_verify(int steps, double lr, const std::vector<std::uint64_t>& seeds, int k, int n, int d,
               bool raw, const std::string& trajectory_csv) {
    bool all_pass = true;
    auto line = [&](const std::string& name, bool pass, const std::string& detail) {
        std::cout << (pass ? "PASS" : "FAIL") << "  " << name << ": " << detail << '\n';
        all_pass = all_pass && pass;
    };

    LabConfig base;
    base.k = k;
    base.n = n;
    base.d = d;
    base.steps = steps;
    base.learning_rate = lr;
    base.parameterization = raw ? LabParameterization::Raw : LabParameterization::Cosine;

    // The simplified loss should collapse every dynamic graph onto the
    // static graph.
    for (std::uint64_t seed : seeds) {
        LabConfig cfg = base;
        cfg.loss_kind = LabLossKind::Simple;
        cfg.seed = seed;
        const LabReport r = run_lab(cfg);
        const double max_norm = std::sqrt(r.final_max_dist_to_static);
        line("simple-loss collapse (seed " + std::to_string(seed) + ")",
             !r.diverged && max_norm < 1e-2 && r.final_loss < r.loss_trajectory.front(),
             "max ||A_i - A_s||_F = " + format_double(max_norm) + ", loss " +
                 format_double(r.final_loss));
    }

    // The contrastive loss should beat the uniform configuration while
    // keeping the dynamic graphs apart.
    const double klogk = uniform_case_loss(k);
    for (std::uint64_t seed : seeds) {
        LabConfig cfg = base;
        cfg.loss_kind = LabLossKind::Full;
        cfg.seed = seed;
        const LabReport r = run_lab(cfg);
        line("contrastive loss beats uniform (seed " + std::to_string(seed) + ")",
             !r.diverged && r.final_loss < klogk - 0.1,
             "final " + format_double(r.final_loss) + " vs k log k = " + format_double(klogk));
        line("dynamic-graph diversity (seed " + std::to_string(seed) + ")",
             !r.diverged && r.final_min_pairwise_dist > 0.05,
             "min pairwise dist = " + format_double(r.final_min_pairwise_dist));
        if (!trajectory_csv.empty() && seed == seeds.front()) {
            std::ofstream out(trajectory_csv);
            out << "step,mean_loss\n";
            for (size_t i = 0; i < r.loss_trajectory.size(); ++i)
                out << i << ',' << format_double(r.loss_trajectory[i]) << '\n';
        }
    }

    // Uniform-start value against the closed form.
    {
        LabConfig cfg = base;
        cfg.loss_kind = LabLossKind::Full;
        cfg.uniform_init = true;
        cfg.steps = 1;
        const LabReport r = run_lab(cfg);
        const double at_start = r.loss_trajectory.front();
        line("uniform start equals k log k", std::abs(at_start - klogk) < 1e-9,
             format_double(at_start) + " vs " + format_double(klogk));
    }

    // Closed-form cross-checks on explicitly constructed graphs.
    {
        bool ok = true;
        std::string detail;
        for (int kk : {2, 3, 5}) {
            for (double c : {0.0, 0.5, 1.0}) {
                Matrix2D base_graph = Matrix2D::identity(4);
                Matrix2D offset = base_graph;
                offset(0, 1) = offset(1, 0) = 0.0;
                Matrix2D shifted = base_graph;
                shifted(0, 0) += c;  // ||shifted - base||_F = c
                GraphSet set;
                set.static_graph = base_graph;
                for (int i = 0; i < kk; ++i) set.dynamic.push_back(shifted);
                const double direct = cohesion_loss(set, 1.0);
                const double closed =
                    c == 0.0 ? uniform_case_loss(kk) : homogeneous_case_loss(kk, c);
                if (std::abs(direct - closed) >= 1e-9) {
                    ok = false;
                    detail += "k=" + std::to_string(kk) + " c=" + format_double(c) + " direct " +
                              format_double(direct) + " vs closed " + format_double(closed) + "; ";
                }
            }
        }
        line("closed forms match direct evaluation", ok, ok ? "k in {2,3,5}, c in {0,0.5,1}" : detail);
    }

    return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"PMGC: prospective multi-graph cohesion anomaly detection"};
    app.require_subcommand(1);

    // synth ------------------------------------------------------------------
    auto* synth = app.add_subcommand("synth", "generate a synthetic labeled dataset");
    std::string synth_spec, synth_out = ".";
    synth->add_option("--spec", synth_spec, "synthetic spec file (key = value)")
        ->required()
        ->check(CLI::ExistingFile);
    synth->add_option("--out", synth_out, "output directory for train.csv/test.csv");

    // train ------------------------------------------------------------------
    auto* tr = app.add_subcommand("train", "train a model on a training CSV");
    std::string train_csv, train_out = "model.ckpt", train_norm = "minmax", train_config_file;
    TrainConfig tcfg;
    std::string train_mode = "full";
    int train_downsample = 1;
    tr->add_option("--config", train_config_file,
                   "key = value config file; explicit flags override it");
    tr->add_option("--train", train_csv, "training CSV")->required()->envname("PMGC_TRAIN");
    tr->add_option("--out", train_out, "checkpoint output path")->envname("PMGC_OUT");
    tr->add_option("--seed", tcfg.seed, "RNG seed")->envname("PMGC_SEED");
    tr->add_option("--mode", train_mode,
                   "full|wo-dynamic|wo-static|wo-prospective|static-avg|simple-gc")
        ->envname("PMGC_MODE");
    tr->add_option("--epochs", tcfg.epochs, "training epochs")->envname("PMGC_EPOCHS");
    tr->add_option("--window", tcfg.model.w, "window width w")->envname("PMGC_WINDOW");
    tr->add_option("--pred-window", tcfg.model.p, "prediction width p")->envname("PMGC_PRED_WINDOW");
    tr->add_option("--k", tcfg.model.k, "number of dynamic graphs")->envname("PMGC_K");
    tr->add_option("--d", tcfg.model.d, "hidden dimension")->envname("PMGC_D");
    tr->add_option("--lambda", tcfg.model.lambda, "cohesion loss weight")->envname("PMGC_LAMBDA");
    tr->add_option("--tau", tcfg.model.tau, "similarity temperature")->envname("PMGC_TAU");
    tr->add_option("--beta", tcfg.model.beta, "MixHop self-mixing ratio")->envname("PMGC_BETA");
    tr->add_option("--lr", tcfg.learning_rate, "Adam learning rate")->envname("PMGC_LR");
    tr->add_option("--batch", tcfg.batch_size, "mini-batch size")->envname("PMGC_BATCH");
    tr->add_option("--val-fraction", tcfg.validation_fraction, "validation fraction")
        ->envname("PMGC_VAL_FRACTION");
    tr->add_flag("--val-pred-only{false}", tcfg.validation_total_loss,
                 "select the best epoch on prediction loss instead of total loss");
    std::string train_prop = "adjacency";
    tr->add_option("--propagation", train_prop, "adjacency|laplacian GNN propagation")
        ->envname("PMGC_PROPAGATION");
    tr->add_option("--norm", train_norm, "minmax|zscore channel normalization")
        ->envname("PMGC_NORM");
    tr->add_option("--downsample", train_downsample, "median-downsample every S rows");
    bool train_ffill = false;
    tr->add_flag("--forward-fill", train_ffill, "forward-fill missing cells instead of rejecting");

    // score ------------------------------------------------------------------
    auto* sc = app.add_subcommand("score", "score a test CSV with a trained model");
    std::string score_ckpt, score_csv, score_out = "scores.txt", score_stats_csv;
    double score_threshold = std::numeric_limits<double>::quiet_NaN();
    int score_downsample = 1;
    sc->add_option("--model", score_ckpt, "checkpoint path")->required()->check(CLI::ExistingFile);
    sc->add_option("--test", score_csv, "test CSV")->required()->check(CLI::ExistingFile);
    sc->add_option("--out", score_out, "score table output path")->envname("PMGC_OUT");
    sc->add_option("--threshold", score_threshold, "decision threshold (omit for scores only)");
    sc->add_option("--stats-csv", score_stats_csv,
                   "series whose forecast errors supply median/IQR (default: the test series)");
    sc->add_option("--downsample", score_downsample, "median-downsample every S rows");
    bool score_ffill = false;
    sc->add_flag("--forward-fill", score_ffill, "forward-fill missing cells instead of rejecting");

    // eval -------------------------------------------------------------------
    auto* ev = app.add_subcommand("eval", "evaluate a score file against labels");
    std::string eval_scores, eval_csv, eval_report;
    ev->add_option("--scores", eval_scores, "score file from `pmgc score`")
        ->required()
        ->check(CLI::ExistingFile);
    ev->add_option("--test", eval_csv, "labeled test CSV")->required()->check(CLI::ExistingFile);
    ev->add_option("--out", eval_report, "also write the report to this path");

    // verify -----------------------------------------------------------------
    auto* vf = app.add_subcommand("verify", "empirically check the cohesion-loss optimization behavior");
    int vf_steps = 2000, vf_k = 3, vf_n = 5, vf_d = 4;
    double vf_lr = 1e-2;
    std::vector<std::uint64_t> vf_seeds{1, 2, 3};
    bool vf_raw = false;
    std::string vf_traj;
    vf->add_option("--steps", vf_steps, "optimizer steps");
    vf->add_option("--lr", vf_lr, "learning rate");
    vf->add_option("--seeds", vf_seeds, "seeds to try")->delimiter(',');
    vf->add_option("--k", vf_k, "dynamic graphs per sample");
    vf->add_option("--n", vf_n, "nodes");
    vf->add_option("--d", vf_d, "embedding dimension");
    vf->add_flag("--raw", vf_raw, "optimize raw clamped matrices instead of cosine embeddings");
    vf->add_option("--trajectory-csv", vf_traj, "write the first full-loss trajectory as CSV");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) return cmd_synth(synth_spec, synth_out);
        if (tr->parsed()) {
            if (!train_config_file.empty()) apply_config_file(train_config_file, tr);
            tcfg.model.mode = parse_mode(train_mode);
            if (train_prop == "laplacian") tcfg.model.propagation = Propagation::Laplacian;
            else if (train_prop != "adjacency")
                throw std::runtime_error("--propagation must be adjacency or laplacian");
            return cmd_train(train_csv, train_out, tcfg, train_norm, train_downsample,
                             train_ffill ? MissingPolicy::ForwardFill : MissingPolicy::Reject);
        }
        if (sc->parsed())
            return cmd_score(score_ckpt, score_csv, score_out,
                             std::isnan(score_threshold) ? std::nullopt
                                                         : std::optional<double>(score_threshold),
                             score_stats_csv, score_downsample,
                             score_ffill ? MissingPolicy::ForwardFill : MissingPolicy::Reject);
        if (ev->parsed()) return cmd_eval(eval_scores, eval_csv, eval_report);
        if (vf->parsed())
            return cmd_verify(vf_steps, vf_lr, vf_seeds, vf_k, vf_n, vf_d, vf_raw, vf_traj);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
