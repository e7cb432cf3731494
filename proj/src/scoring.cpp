#include "pmgc/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "pmgc/data_pipeline.hpp"

namespace pmgc {

ErrorMatrix forecast_errors(const Matrix2D& test, const ModelParams& params) {
    const ModelConfig& config = params.config;
    if (test.rows != params.n)
        throw std::invalid_argument("forecast_errors: series has " + std::to_string(test.rows) +
                                    " channels, model expects " + std::to_string(params.n));
    if (test.cols < config.w)
        throw std::invalid_argument("forecast_errors: series length " + std::to_string(test.cols) +
                                    " shorter than window " + std::to_string(config.w));
    const int scored = test.cols - config.w + 1;
    ErrorMatrix out;
    out.first_tick = config.w - 1;
    out.err = Matrix2D(test.rows, scored);

    for (int s = 0; s < scored; ++s) {
        const int end = config.w - 1 + s;
        WindowSample sample;
        sample.full = col_slice(test, end - config.w + 1, end + 1);
        sample.pred_len = config.p;
        sample.end_tick = end;

        Tape tape;
        ParamLeaves leaves = make_leaves(tape, params.store);
        ForwardResult fwd = build_forward(tape, sample, leaves, config, /*with_loss=*/false);
        const Matrix2D& mean = fwd.mean_prediction.value();
        for (int c = 0; c < test.rows; ++c)
            out.err(c, s) = std::abs(test(c, end) - mean(c, config.p - 1));
    }
    return out;
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) throw std::invalid_argument("quantile_sorted: empty input");
    if (q <= 0.0) return sorted.front();
    if (q >= 1.0) return sorted.back();
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const size_t lo = static_cast<size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

RobustStats robust_stats(const ErrorMatrix& err) {
    const int ticks = err.err.cols;
    if (ticks < 4) throw std::invalid_argument("robust_stats: need at least 4 scored ticks, have " +
                                               std::to_string(ticks));
    RobustStats stats;
    stats.median.resize(err.err.rows);
    stats.iqr.resize(err.err.rows);
    std::vector<double> sorted(ticks);
    for (int c = 0; c < err.err.rows; ++c) {
        for (int t = 0; t < ticks; ++t) sorted[t] = err.err(c, t);
        std::sort(sorted.begin(), sorted.end());
        stats.median[c] = quantile_sorted(sorted, 0.5);
        stats.iqr[c] = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
    }
    return stats;
}

ScoreSeries normalize_and_aggregate(const ErrorMatrix& err, const RobustStats& stats) {
    if (static_cast<int>(stats.median.size()) != err.err.rows)
        throw std::invalid_argument("normalize_and_aggregate: stats/error channel mismatch");
    constexpr double kIqrFloor = 1e-6;
    ScoreSeries out;
    out.first_tick = err.first_tick;
    out.scores.resize(err.err.cols);
    out.top_channel.resize(err.err.cols);
    for (int t = 0; t < err.err.cols; ++t) {
        double best = -std::numeric_limits<double>::infinity();
        int arg = 0;
        for (int c = 0; c < err.err.rows; ++c) {
            const double a =
                (err.err(c, t) - stats.median[c]) / std::max(stats.iqr[c], kIqrFloor);
            if (a > best) {
                best = a;
                arg = c;
            }
        }
        out.scores[t] = best;
        out.top_channel[t] = arg;
    }
    return out;
}

ScoreSeries apply_threshold(ScoreSeries scores, double threshold) {
    scores.threshold = threshold;
    scores.decisions.resize(scores.scores.size());
    for (size_t i = 0; i < scores.scores.size(); ++i)
        scores.decisions[i] = scores.scores[i] > threshold ? 1 : 0;
    return scores;
}

void write_scores(const std::string& path, const ScoreSeries& scores) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << "# pmgc scores v1\n";
    if (scores.threshold)
        out << "# threshold " << format_double(*scores.threshold) << '\n';
    out << "# columns: tick score" << (scores.threshold ? " decision" : "") << " top_channel\n";
    for (size_t i = 0; i < scores.scores.size(); ++i) {
        out << (scores.first_tick + static_cast<int>(i)) << ' ' << format_double(scores.scores[i]);
        if (scores.threshold) out << ' ' << scores.decisions[i];
        out << ' ' << scores.top_channel[i] << '\n';
    }
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

ScoreSeries read_scores(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    ScoreSeries out;
    bool first_row = true;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ss(line);
            std::string hash, key;
            ss >> hash >> key;
            if (key == "threshold") {
                std::string v;
                ss >> v;
                out.threshold = parse_double(v);
            }
            continue;
        }
        std::istringstream ss(line);
        long tick = 0;
        std::string score_tok;
        if (!(ss >> tick >> score_tok))
            throw std::runtime_error("'" + path + "': malformed score row '" + line + "'");
        if (first_row) {
            out.first_tick = static_cast<int>(tick);
            first_row = false;
        }
        out.scores.push_back(parse_double(score_tok));
        int decision = 0;
        if (out.threshold) {
            if (!(ss >> decision))
                throw std::runtime_error("'" + path + "': missing decision column in '" + line + "'");
            out.decisions.push_back(decision);
        }
        int channel = 0;
        if (!(ss >> channel))
            throw std::runtime_error("'" + path + "': missing top_channel column in '" + line + "'");
        out.top_channel.push_back(channel);
    }
    if (out.scores.empty()) throw std::runtime_error("'" + path + "': no score rows");
    return out;
}

}  // namespace pmgc
