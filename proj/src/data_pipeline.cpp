#include "pmgc/data_pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "pmgc/rng.hpp"

namespace pmgc {

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw std::runtime_error("format_double failed");
    return std::string(buf, ptr);
}

double parse_double(const std::string& s, bool* ok) {
    double v = 0.0;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    const bool good = ec == std::errc{} && ptr == end;
    if (ok) *ok = good;
    if (!ok && !good) throw std::invalid_argument("not a number: '" + s + "'");
    return v;
}

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

bool is_missing(const std::string& cell) {
    if (cell.empty()) return true;
    std::string low = cell;
    std::transform(low.begin(), low.end(), low.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return low == "nan" || low == "na";
}

}  // namespace

bool csv_has_label_column(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::string header;
    if (!std::getline(in, header)) return false;
    auto cells = split_csv_line(header);
    return !cells.empty() && cells.back() == "label";
}

RawSeries load_csv(const std::string& path, bool has_labels, MissingPolicy missing) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty file '" + path + "'");
    std::vector<std::string> header = split_csv_line(line);
    if (header.empty()) throw std::runtime_error("empty header in '" + path + "'");

    int label_col = -1;
    if (has_labels) {
        if (header.back() != "label")
            throw std::runtime_error("'" + path + "': expected final column named 'label'");
        label_col = static_cast<int>(header.size()) - 1;
    }
    const int n = static_cast<int>(header.size()) - (has_labels ? 1 : 0);
    if (n <= 0) throw std::runtime_error("'" + path + "': no data columns");

    std::vector<std::vector<double>> columns(n);
    std::vector<int> labels;
    int row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw std::runtime_error("'" + path + "': row " + std::to_string(row) + " has " +
                                     std::to_string(cells.size()) + " cells, expected " +
                                     std::to_string(header.size()));
        for (int c = 0; c < static_cast<int>(cells.size()); ++c) {
            const bool is_label = c == label_col;
            if (is_missing(cells[c])) {
                if (is_label || missing == MissingPolicy::Reject)
                    throw std::runtime_error("'" + path + "': missing value at row " +
                                             std::to_string(row) + ", column '" + header[c] + "'");
                if (columns[c].empty())
                    throw std::runtime_error("'" + path + "': cannot forward-fill first row, column '" +
                                             header[c] + "'");
                columns[c].push_back(columns[c].back());
                continue;
            }
            bool ok = false;
            const double v = parse_double(cells[c], &ok);
            if (!ok || !std::isfinite(v))
                throw std::runtime_error("'" + path + "': cannot parse '" + cells[c] +
                                         "' at row " + std::to_string(row) + ", column '" +
                                         header[c] + "'");
            if (is_label) {
                if (v != 0.0 && v != 1.0)
                    throw std::runtime_error("'" + path + "': label must be 0/1 at row " +
                                             std::to_string(row));
                labels.push_back(static_cast<int>(v));
            } else {
                columns[c].push_back(v);
            }
        }
    }
    if (row == 0) throw std::runtime_error("'" + path + "': no data rows");

    RawSeries series;
    const int t = static_cast<int>(columns[0].size());
    series.values = Matrix2D(n, t);
    for (int c = 0; c < n; ++c)
        for (int i = 0; i < t; ++i) series.values(c, i) = columns[c][i];
    series.channel_names.assign(header.begin(), header.begin() + n);
    series.labels = std::move(labels);
    return series;
}

void write_csv(const std::string& path, const RawSeries& series) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    for (int c = 0; c < series.channels(); ++c) {
        if (c) out << ',';
        out << series.channel_names[c];
    }
    if (series.has_labels()) out << ",label";
    out << '\n';
    for (int t = 0; t < series.ticks(); ++t) {
        for (int c = 0; c < series.channels(); ++c) {
            if (c) out << ',';
            out << format_double(series.values(c, t));
        }
        if (series.has_labels()) out << ',' << series.labels[t];
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

NormalizationStats compute_stats(const RawSeries& train) {
    NormalizationStats stats;
    const int n = train.channels();
    const int t = train.ticks();
    if (t == 0) throw std::invalid_argument("compute_stats: empty series");
    stats.min.resize(n);
    stats.max.resize(n);
    stats.mean.resize(n);
    stats.stddev.resize(n);
    for (int c = 0; c < n; ++c) {
        double lo = train.values(c, 0), hi = lo, sum = 0.0;
        for (int i = 0; i < t; ++i) {
            const double v = train.values(c, i);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            sum += v;
        }
        const double mean = sum / t;
        double ss = 0.0;
        for (int i = 0; i < t; ++i) {
            const double d = train.values(c, i) - mean;
            ss += d * d;
        }
        stats.min[c] = lo;
        stats.max[c] = hi;
        stats.mean[c] = mean;
        stats.stddev[c] = std::sqrt(ss / t);
    }
    return stats;
}

RawSeries normalize_channels(const RawSeries& series, const NormalizationStats& stats,
                             NormKind kind) {
    if (series.channels() != stats.channels())
        throw std::invalid_argument("normalize_channels: stats for " +
                                    std::to_string(stats.channels()) + " channels, series has " +
                                    std::to_string(series.channels()));
    RawSeries out = series;
    for (int c = 0; c < series.channels(); ++c) {
        double offset, denom;
        if (kind == NormKind::MinMax) {
            offset = stats.min[c];
            denom = stats.max[c] - stats.min[c];
        } else {
            offset = stats.mean[c];
            denom = stats.stddev[c];
        }
        for (int i = 0; i < series.ticks(); ++i) {
            const double v = series.values(c, i);
            out.values(c, i) = denom > 0.0 ? (v - offset) / denom : 0.0;
        }
    }
    return out;
}

std::vector<WindowSample> make_windows(const RawSeries& series, int w, int p) {
    if (p <= 0 || p >= w) throw std::invalid_argument("make_windows: need 0 < p < w");
    if (series.ticks() < w)
        throw std::invalid_argument("make_windows: series has " + std::to_string(series.ticks()) +
                                    " ticks, window needs " + std::to_string(w));
    std::vector<WindowSample> out;
    out.reserve(series.ticks() - w + 1);
    for (int end = w - 1; end < series.ticks(); ++end) {
        WindowSample s;
        s.full = col_slice(series.values, end - w + 1, end + 1);
        s.pred_len = p;
        s.end_tick = end;
        out.push_back(std::move(s));
    }
    return out;
}

RawSeries median_downsample(const RawSeries& series, int every) {
    if (every <= 0) throw std::invalid_argument("median_downsample: bucket must be positive");
    if (every == 1) return series;
    RawSeries out;
    out.channel_names = series.channel_names;
    const int buckets = series.ticks() / every;
    if (buckets == 0) throw std::invalid_argument("median_downsample: series shorter than bucket");
    out.values = Matrix2D(series.channels(), buckets);
    std::vector<double> scratch;
    for (int b = 0; b < buckets; ++b) {
        for (int c = 0; c < series.channels(); ++c) {
            scratch.clear();
            for (int i = b * every; i < (b + 1) * every; ++i) scratch.push_back(series.values(c, i));
            std::sort(scratch.begin(), scratch.end());
            const size_t m = scratch.size();
            out.values(c, b) = m % 2 ? scratch[m / 2] : 0.5 * (scratch[m / 2 - 1] + scratch[m / 2]);
        }
        if (series.has_labels()) {
            int label = 0;
            for (int i = b * every; i < (b + 1) * every; ++i) label = std::max(label, series.labels[i]);
            out.labels.push_back(label);
        }
    }
    return out;
}

SynthData synth_generate(const SynthSpec& spec) {
    if (spec.channels <= 0 || spec.train_ticks <= 0 || spec.test_ticks <= 0)
        throw std::invalid_argument("synth_generate: channels and tick counts must be positive");
    if (spec.latents < 1) throw std::invalid_argument("synth_generate: need at least one latent");
    for (const AnomalySpec& a : spec.anomalies) {
        if (a.magnitude <= 0.0) throw std::invalid_argument("synth_generate: magnitude must be positive");
        if (a.duration <= 0) throw std::invalid_argument("synth_generate: duration must be positive");
        if (a.start < 0 || a.start + a.duration > spec.test_ticks)
            throw std::invalid_argument("synth_generate: anomaly [" + std::to_string(a.start) + ", " +
                                        std::to_string(a.start + a.duration) +
                                        ") outside test range of " + std::to_string(spec.test_ticks));
    }

    SeededRng rng(seed_for(spec.seed, "synth"));
    const int total = spec.train_ticks + spec.test_ticks;
    const int n = spec.channels;
    const int m = spec.latents;

    // Shared sinusoidal drivers with periods between 40 and 200 ticks.
    std::vector<double> freq(m), phase(m);
    for (int l = 0; l < m; ++l) {
        freq[l] = 1.0 / rng.uniform(40.0, 200.0);
        phase[l] = rng.uniform(0.0, 2.0 * std::numbers::pi);
    }
    auto latent = [&](int l, int t) {
        return std::sin(2.0 * std::numbers::pi * freq[l] * t + phase[l]);
    };

    // Mixing weights; magnitudes kept away from zero so every channel carries
    // every latent and the inter-series structure is strong.
    Matrix2D mix(n, m);
    for (int c = 0; c < n; ++c)
        for (int l = 0; l < m; ++l)
            mix(c, l) = rng.uniform(0.4, 1.2) * (rng.uniform() < 0.5 ? -1.0 : 1.0);

    Matrix2D values(n, total);
    for (int c = 0; c < n; ++c)
        for (int t = 0; t < total; ++t) {
            double v = 0.0;
            for (int l = 0; l < m; ++l) v += mix(c, l) * latent(l, t);
            values(c, t) = v + rng.normal(0.0, spec.noise_std);
        }

    // Channel std over the train half, used to size injections.
    std::vector<double> chan_std(n);
    for (int c = 0; c < n; ++c) {
        double sum = 0.0;
        for (int t = 0; t < spec.train_ticks; ++t) sum += values(c, t);
        const double mean = sum / spec.train_ticks;
        double ss = 0.0;
        for (int t = 0; t < spec.train_ticks; ++t) {
            const double d = values(c, t) - mean;
            ss += d * d;
        }
        chan_std[c] = std::sqrt(ss / spec.train_ticks);
    }

    std::vector<int> labels(spec.test_ticks, 0);
    for (const AnomalySpec& a : spec.anomalies) {
        const int channel = static_cast<int>(rng.next_u64() % n);
        for (int i = a.start; i < a.start + a.duration; ++i) labels[i] = 1;
        const int off = spec.train_ticks;
        switch (a.type) {
            case AnomalyType::Spike:
            case AnomalyType::LevelShift:
                for (int i = a.start; i < a.start + a.duration; ++i)
                    values(channel, off + i) += a.magnitude * chan_std[channel];
                break;
            case AnomalyType::CorrelationBreak: {
                // Replace the channel's mixing with an independent driver of
                // matching marginal scale, so only inter-series relations break.
                double norm = 0.0;
                for (int l = 0; l < m; ++l) norm += mix(channel, l) * mix(channel, l);
                const double amp = a.magnitude * std::sqrt(norm);
                const double bfreq = 1.0 / rng.uniform(40.0, 200.0);
                const double bphase = rng.uniform(0.0, 2.0 * std::numbers::pi);
                for (int i = a.start; i < a.start + a.duration; ++i) {
                    const int t = off + i;
                    const double indep = std::sin(2.0 * std::numbers::pi * bfreq * t + bphase);
                    values(channel, t) = amp * indep + rng.normal(0.0, spec.noise_std);
                }
                break;
            }
        }
    }

    SynthData out;
    out.train.values = col_slice(values, 0, spec.train_ticks);
    out.test.values = col_slice(values, spec.train_ticks, total);
    out.test.labels = std::move(labels);
    for (int c = 0; c < n; ++c) {
        out.train.channel_names.push_back("ch_" + std::to_string(c));
        out.test.channel_names.push_back("ch_" + std::to_string(c));
    }
    return out;
}

SynthSpec parse_synth_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    SynthSpec spec;
    spec.anomalies.clear();
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string stripped = trim(line.substr(0, line.find('#')));
        if (stripped.empty()) continue;
        const size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        auto as_int = [&](const std::string& v) {
            bool ok = false;
            const double d = parse_double(v, &ok);
            if (!ok) throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad number '" + v + "'");
            return static_cast<int>(d);
        };
        if (key == "channels") spec.channels = as_int(value);
        else if (key == "train_ticks") spec.train_ticks = as_int(value);
        else if (key == "test_ticks") spec.test_ticks = as_int(value);
        else if (key == "seed") spec.seed = static_cast<std::uint64_t>(as_int(value));
        else if (key == "latents") spec.latents = as_int(value);
        else if (key == "noise_std") {
            bool ok = false;
            spec.noise_std = parse_double(value, &ok);
            if (!ok) throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad number");
        } else if (key == "anomaly") {
            auto parts = split_csv_line(value);
            if (parts.size() != 4)
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": anomaly needs type,start,duration,magnitude");
            AnomalySpec a;
            if (parts[0] == "spike") a.type = AnomalyType::Spike;
            else if (parts[0] == "level-shift") a.type = AnomalyType::LevelShift;
            else if (parts[0] == "correlation-break") a.type = AnomalyType::CorrelationBreak;
            else
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": unknown anomaly type '" + parts[0] + "'");
            a.start = as_int(parts[1]);
            a.duration = as_int(parts[2]);
            bool ok = false;
            a.magnitude = parse_double(parts[3], &ok);
            if (!ok) throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad magnitude");
            spec.anomalies.push_back(a);
        } else {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
    }
    return spec;
}

}  // namespace pmgc
