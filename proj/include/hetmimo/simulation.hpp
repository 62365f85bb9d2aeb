#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "config.hpp"
#include "network.hpp"

namespace hetmimo {

enum class Link { UL, DL };
enum class PowerMode { FullEqual, MaxMin };

inline std::string link_name(Link l) { return l == Link::UL ? "UL" : "DL"; }
inline std::string power_mode_name(PowerMode p) { return p == PowerMode::FullEqual ? "full-equal" : "maxmin"; }

inline bool wants(LinkSelection sel, Link l) {
    return sel == LinkSelection::Both || (sel == LinkSelection::Uplink) == (l == Link::UL);
}
inline bool wants(PowerControl sel, PowerMode p) {
    return sel == PowerControl::Both || (sel == PowerControl::MaxMin) == (p == PowerMode::MaxMin);
}

/// Per-user SE of one epoch for every requested (link, power mode) series.
/// Uplink series hold users·draws entries in PerDraw sampling mode.
struct EpochResult {
    std::uint64_t epoch = 0;
    std::map<std::pair<Link, PowerMode>, std::vector<double>> se;
    int warnings = 0;
};

inline EpochResult run_epoch(const ScenarioConfig& cfg, std::uint64_t epoch) {
    EpochResult out;
    out.epoch = epoch;
    const EpochModel m = build_epoch(cfg, epoch);
    const int K = m.users();

    if (wants(cfg.link, Link::DL)) {
        const DlLinkModel d = dl_link_model(m);
        const double prelog = cfg.dl_prelog ? 1.0 - static_cast<double>(cfg.pilot_length) / cfg.coherence_block : 1.0;
        auto to_se = [&](const RVector& g) {
            std::vector<double> se(static_cast<std::size_t>(g.size()));
            for (Index k = 0; k < g.size(); ++k) se[k] = dl_se(g(k), prelog);
            return se;
        };
        if (wants(cfg.power_control, PowerMode::FullEqual))
            out.se[{Link::DL, PowerMode::FullEqual}] = to_se(dl_link_sinr(d, dl_equal_links(d)));
        if (wants(cfg.power_control, PowerMode::MaxMin)) {
            const DlMaxMinResult r = dl_maxmin(m, d);
            out.se[{Link::DL, PowerMode::MaxMin}] = to_se(r.sinr);
            out.warnings += r.warning;
        }
    }

    if (wants(cfg.link, Link::UL)) {
        Rng rng = substream(cfg.seed, epoch, StreamTag::Fading);
        const bool full = wants(cfg.power_control, PowerMode::FullEqual);
        const bool mm = wants(cfg.power_control, PowerMode::MaxMin);
        const bool per_draw = cfg.ul_sample_mode == UlSampleMode::PerDraw;
        const int draws = std::max(1, cfg.fading_draws_per_epoch);
        std::vector<double> acc_full(per_draw ? 0 : K, 0.0), acc_mm(per_draw ? 0 : K, 0.0);
        const auto groups = maxmin_groups(m);
        for (int t = 0; t < draws; ++t) {
            const UlDraw draw = draw_uplink(m, rng);
            const SinrSystem s = ul_system_fast(m, draw);
            auto record = [&](std::vector<double>& acc, const RVector& g) {
                for (int k = 0; k < K; ++k) {
                    const double se = ul_se(g(k), cfg.pilot_length, cfg.coherence_block);
                    if (per_draw) acc.push_back(se); else acc[k] += se / draws;
                }
            };
            if (full) record(acc_full, s.sinr(RVector::Ones(K)));
            if (mm) {
                const MaxMinResult r = solve_maxmin_scoped(s, RVector::Ones(K), groups);
                out.warnings += r.warning;
                record(acc_mm, s.sinr(r.mu));
            }
        }
        if (full) out.se[{Link::UL, PowerMode::FullEqual}] = std::move(acc_full);
        if (mm) out.se[{Link::UL, PowerMode::MaxMin}] = std::move(acc_mm);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Results and summaries

struct SeSample {
    std::uint64_t epoch = 0;
    Paradigm paradigm = Paradigm::Hetero;
    Link link = Link::DL;
    PowerMode power = PowerMode::FullEqual;
    int user = 0;
    double se = 0.0;
};

struct SeriesSummary {
    double p5 = NAN;
    double p50 = NAN;
    double mean = NAN;
    std::size_t count = 0;
};

struct SEResults {
    std::vector<SeSample> samples;
    std::map<std::pair<Link, PowerMode>, SeriesSummary> summary;
    std::vector<EpochResult> epochs;  // per-epoch per-user values, in epoch order
    std::uint64_t epochs_run = 0;
    std::uint64_t seed = 0;
    Paradigm paradigm = Paradigm::Hetero;
    int warnings = 0;

    std::vector<double> series(Link l, PowerMode p) const {
        std::vector<double> v;
        for (const auto& s : samples)
            if (s.link == l && s.power == p) v.push_back(s.se);
        return v;
    }
};

/// Lower order statistic at rank ceil(p·n).
inline double percentile(std::vector<double> v, double p) {
    if (v.empty()) throw std::domain_error("percentile: empty sample");
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("percentile: p must lie in (0, 1)");
    const std::size_t n = v.size();
    std::size_t rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n)));
    rank = std::clamp<std::size_t>(rank, 1, n);
    std::nth_element(v.begin(), v.begin() + (rank - 1), v.end());
    return v[rank - 1];
}

/// Right-continuous empirical CDF: one (value, fraction ≤ value) pair per
/// distinct value.
inline std::vector<std::pair<double, double>> empirical_cdf(std::vector<double> v) {
    if (v.empty()) throw std::domain_error("empirical_cdf: empty sample");
    std::sort(v.begin(), v.end());
    std::vector<std::pair<double, double>> out;
    const double n = static_cast<double>(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        if (i + 1 == v.size() || v[i + 1] != v[i]) out.emplace_back(v[i], static_cast<double>(i + 1) / n);
    return out;
}

inline SeriesSummary summarize(const std::vector<double>& v) {
    SeriesSummary s;
    s.count = v.size();
    if (v.empty()) return s;
    s.p5 = percentile(v, 0.05);
    s.p50 = percentile(v, 0.5);
    double sum = 0.0;
    for (double x : v) sum += x;
    s.mean = sum / static_cast<double>(v.size());
    return s;
}

inline void finalize(SEResults& r, const ScenarioConfig& cfg) {
    r.samples.clear();
    r.summary.clear();
    r.warnings = 0;
    r.paradigm = cfg.paradigm;
    r.seed = cfg.seed;
    r.epochs_run = r.epochs.size();
    const int K = cfg.users_total;
    for (const auto& e : r.epochs) {
        r.warnings += e.warnings;
        for (const auto& [key, values] : e.se)
            for (std::size_t i = 0; i < values.size(); ++i)
                r.samples.push_back({e.epoch, cfg.paradigm, key.first, key.second, static_cast<int>(i % K), values[i]});
    }
    for (Link l : {Link::UL, Link::DL})
        for (PowerMode p : {PowerMode::FullEqual, PowerMode::MaxMin})
            if (wants(cfg.link, l) && wants(cfg.power_control, p)) r.summary[{l, p}] = summarize(r.series(l, p));
}

/// Runs all epochs on `workers` threads. Epoch e uses only its own keyed
/// substreams, and results are merged in epoch order, so the output does not
/// depend on the worker count.
inline SEResults run_simulation(const ScenarioConfig& cfg, int workers = 1) {
    const ValidationReport rep = validate(cfg);
    if (!rep.ok()) throw std::invalid_argument("invalid configuration:\n" + rep.to_string());
    SEResults out;
    const std::size_t n = cfg.epochs > 0 ? static_cast<std::size_t>(cfg.epochs) : 0;
    out.epochs.resize(n);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    auto work = [&] {
        for (;;) {
            const std::size_t e = next.fetch_add(1);
            if (e >= n) return;
            try {
                out.epochs[e] = run_epoch(cfg, e);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mu);
                if (!failure) failure = std::current_exception();
                next = n;
                return;
            }
        }
    };
    workers = std::max(1, workers);
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
    finalize(out, cfg);
    return out;
}

// ---------------------------------------------------------------------------
// CSV input/output

inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_samples_csv(std::ostream& os, const SEResults& r) {
    os << "epoch,paradigm,link,power_mode,user,se_bps_hz\n";
    for (const auto& s : r.samples)
        os << s.epoch << ',' << to_string(s.paradigm) << ',' << link_name(s.link) << ','
           << power_mode_name(s.power) << ',' << s.user << ',' << format_number(s.se) << '\n';
}

inline void write_summary_csv(std::ostream& os, const SEResults& r) {
    os << "paradigm,link,power_mode,p5,p50,mean,epochs,seed\n";
    for (const auto& [key, s] : r.summary)
        os << to_string(r.paradigm) << ',' << link_name(key.first) << ',' << power_mode_name(key.second) << ','
           << format_number(s.p5) << ',' << format_number(s.p50) << ',' << format_number(s.mean) << ','
           << r.epochs_run << ',' << r.seed << '\n';
}

inline void write_cdf_csv(std::ostream& os, const std::vector<double>& values) {
    os << "se_bps_hz,cdf\n";
    if (values.empty()) return;
    for (const auto& [v, f] : empirical_cdf(values)) os << format_number(v) << ',' << format_number(f) << '\n';
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(line);
    while (std::getline(is, cur, ',')) out.push_back(cur);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace detail

inline Link link_from_name(const std::string& s) {
    if (s == "UL") return Link::UL;
    if (s == "DL") return Link::DL;
    throw std::invalid_argument("unknown link '" + s + "'");
}

inline PowerMode power_mode_from_name(const std::string& s) {
    if (s == "full-equal") return PowerMode::FullEqual;
    if (s == "maxmin") return PowerMode::MaxMin;
    throw std::invalid_argument("unknown power mode '" + s + "'");
}

inline std::vector<SeSample> read_samples_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != "epoch,paradigm,link,power_mode,user,se_bps_hz")
        throw std::runtime_error("samples csv: unexpected header");
    std::vector<SeSample> out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto f = detail::split_csv_line(line);
        if (f.size() != 6) throw std::runtime_error("samples csv: malformed row '" + line + "'");
        out.push_back({std::stoull(f[0]), enum_from_string<Paradigm>(f[1]), link_from_name(f[2]),
                       power_mode_from_name(f[3]), std::stoi(f[4]), std::stod(f[5])});
    }
    return out;
}

struct SummaryRow {
    std::string paradigm;
    Link link = Link::DL;
    PowerMode power = PowerMode::FullEqual;
    double p5 = NAN, p50 = NAN, mean = NAN;
    std::uint64_t epochs = 0;
    std::uint64_t seed = 0;
};

inline std::vector<SummaryRow> read_summary_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != "paradigm,link,power_mode,p5,p50,mean,epochs,seed")
        throw std::runtime_error("summary csv: unexpected header");
    std::vector<SummaryRow> out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto f = detail::split_csv_line(line);
        if (f.size() != 8) throw std::runtime_error("summary csv: malformed row '" + line + "'");
        out.push_back({f[0], link_from_name(f[1]), power_mode_from_name(f[2]), std::stod(f[3]), std::stod(f[4]),
                       std::stod(f[5]), std::stoull(f[6]), std::stoull(f[7])});
    }
    return out;
}

}  // namespace hetmimo
