#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "config.hpp"
#include "geometry.hpp"
#include "simulation.hpp"
#include "validation.hpp"

namespace hetmimo {

inline constexpr const char* kVersion = "1.0.0";

enum ExitCode { kExitOk = 0, kExitUsage = 1, kExitValidation = 2, kExitRuntime = 3 };

struct RunRequest {
    std::string preset;
    std::string config_path;
    std::optional<int> epochs;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> link;
    std::optional<std::string> power;
    std::string out = "hetmimo-out";
    int workers = 0;
};

namespace detail {

inline LinkSelection link_flag(const std::string& s) {
    if (s == "ul") return LinkSelection::Uplink;
    if (s == "dl") return LinkSelection::Downlink;
    return LinkSelection::Both;
}

inline PowerControl power_flag(const std::string& s) {
    if (s == "full-equal") return PowerControl::FullEqual;
    if (s == "maxmin") return PowerControl::MaxMin;
    return PowerControl::Both;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for " + p.string());
}

inline std::string cdf_file_name(Link l, PowerMode p) {
    std::string s = "cdf_" + link_name(l) + "_" + power_mode_name(p) + ".csv";
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

inline const char* kPlotScript = R"(# Plots every cdf_*.csv in this directory. Usage: python3 plot_cdf.py [run_dir ...]
import csv, glob, os, sys
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

dirs = sys.argv[1:] or [os.path.dirname(os.path.abspath(__file__))]
fig, ax = plt.subplots(figsize=(7, 4.5))
for d in dirs:
    for path in sorted(glob.glob(os.path.join(d, "cdf_*.csv"))):
        with open(path) as f:
            rows = list(csv.DictReader(f))
        xs = [float(r["se_bps_hz"]) for r in rows]
        ys = [float(r["cdf"]) for r in rows]
        label = os.path.basename(os.path.normpath(d)) + " " + os.path.basename(path)[4:-4]
        ax.step(xs, ys, where="post", label=label)
ax.axhline(0.05, color="grey", lw=0.5, ls="--")
ax.set_xlabel("SE [bit/s/Hz]")
ax.set_ylabel("CDF")
ax.legend(fontsize=7)
fig.tight_layout()
fig.savefig(os.path.join(dirs[0], "cdf.png"), dpi=150)
)";

}  // namespace detail

/// Resolves preset or config file, then environment overrides, then flags.
inline ScenarioConfig resolve_config(const RunRequest& req) {
    if (req.preset.empty() == req.config_path.empty())
        throw CLI::ValidationError("run", "exactly one of --preset or --config is required");
    ScenarioConfig cfg;
    if (!req.preset.empty()) {
        const auto p = preset_from_name(req.preset);
        if (!p) throw CLI::ValidationError("--preset", "unknown preset '" + req.preset + "'");
        cfg = paradigm_preset(*p);
    } else {
        cfg = parse(detail::read_file(req.config_path));
    }
    cfg = apply_env_overrides(cfg);
    if (req.epochs) cfg.epochs = *req.epochs;
    if (req.seed) cfg.seed = *req.seed;
    if (req.link) cfg.link = detail::link_flag(*req.link);
    if (req.power) cfg.power_control = detail::power_flag(*req.power);
    return cfg;
}

inline nlohmann::json run_metadata(const ScenarioConfig& cfg, const RunRequest& req, const SEResults& r) {
    nlohmann::json j;
    j["software"] = "hetmimo";
    j["version"] = kVersion;
    j["source"] = req.preset.empty() ? "config:" + req.config_path : "preset:" + req.preset;
    j["seed"] = cfg.seed;
    j["epochs"] = r.epochs_run;
    j["percentile"] = "lower order statistic at rank ceil(p*n)";
    j["cdf"] = "right-continuous empirical CDF, one row per distinct value";
    j["warnings"] = r.warnings;
    nlohmann::json c;
    for (const auto& k : config_keys()) c[k] = get_field(cfg, k);
    j["config"] = c;
    const CostReport cost = fronthaul_cost(cfg);
    j["cost"] = {{"ap_sites", cost.ap_sites},
                 {"fronthaul_links", cost.fronthaul_links},
                 {"reduction_vs_cellfree", cost.reduction_vs_cellfree}};
    return j;
}

inline int cmd_run(const RunRequest& req, std::ostream& out, std::ostream& err) {
    const ScenarioConfig cfg = resolve_config(req);
    const ValidationReport rep = validate(cfg);
    if (!rep.ok()) {
        err << "invalid configuration:\n" << rep.to_string();
        return kExitValidation;
    }
    const int workers = req.workers > 0 ? req.workers : std::max(1u, std::thread::hardware_concurrency());
    const SEResults r = run_simulation(cfg, workers);

    const std::filesystem::path dir(req.out);
    std::filesystem::create_directories(dir);
    std::ostringstream samples, summary;
    write_samples_csv(samples, r);
    write_summary_csv(summary, r);
    detail::write_file(dir / "samples.csv", samples.str());
    detail::write_file(dir / "summary.csv", summary.str());
    for (const auto& [key, s] : r.summary) {
        std::ostringstream cdf;
        write_cdf_csv(cdf, r.series(key.first, key.second));
        detail::write_file(dir / detail::cdf_file_name(key.first, key.second), cdf.str());
    }
    detail::write_file(dir / "config.txt", render(cfg));
    detail::write_file(dir / "run.json", run_metadata(cfg, req, r).dump(2) + "\n");
    detail::write_file(dir / "plot_cdf.py", detail::kPlotScript);

    out << summary.str();
    if (r.warnings) err << "warning: " << r.warnings << " power-control solves ended infeasible\n";
    return kExitOk;
}

inline int cmd_presets(std::ostream& out) {
    out << std::left << std::setw(16) << "preset" << std::setw(11) << "paradigm" << std::setw(7) << "cells"
        << std::setw(8) << "cbs_ant" << std::setw(6) << "aps" << std::setw(8) << "ap_ant" << std::setw(10)
        << "antennas" << std::setw(7) << "links" << "reduction\n";
    for (const auto& [name, p] : preset_names()) {
        const ScenarioConfig c = paradigm_preset(p);
        const CostReport cost = fronthaul_cost(c);
        out << std::left << std::setw(16) << name << std::setw(11) << to_string(c.paradigm) << std::setw(7)
            << c.num_cells << std::setw(8) << c.cbs_antennas << std::setw(6) << cost.ap_sites << std::setw(8)
            << c.eap_antennas << std::setw(10) << c.total_antennas() << std::setw(7) << cost.fronthaul_links
            << cost.reduction_vs_cellfree << '\n';
    }
    return kExitOk;
}

inline int cmd_validate(const ValidationSuiteOptions& opt, std::ostream& out) {
    const auto rows = run_validation_suite(opt);
    out << render_checks(rows);
    return all_pass(rows) ? kExitOk : kExitValidation;
}

// ---------------------------------------------------------------------------
// Comparison of finished runs

struct RunSummary {
    std::string dir;
    std::string error;
    std::string paradigm;
    std::vector<SummaryRow> rows;
    CostReport cost;
};

inline RunSummary load_run(const std::string& dir) {
    RunSummary s;
    s.dir = dir;
    try {
        const std::filesystem::path d(dir);
        std::istringstream summary(detail::read_file(d / "summary.csv"));
        s.rows = read_summary_csv(summary);
        const ScenarioConfig cfg = parse(detail::read_file(d / "config.txt"));
        s.paradigm = to_string(cfg.paradigm);
        s.cost = fronthaul_cost(cfg);
    } catch (const std::exception& e) {
        s.error = e.what();
    }
    return s;
}

/// Ordering of runs by p5 on one series. `≫` marks a ratio of at least 10.
inline std::string ordering_line(std::vector<std::pair<std::string, double>> p5) {
    std::stable_sort(p5.begin(), p5.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    std::ostringstream os;
    for (std::size_t i = 0; i < p5.size(); ++i) {
        if (i) {
            const double a = p5[i - 1].second, b = p5[i].second;
            os << (a == b ? " = " : a >= 10.0 * b ? " >> " : " > ");
        }
        os << p5[i].first;
    }
    return os.str();
}

inline int cmd_compare(const std::vector<std::string>& dirs, std::ostream& out) {
    std::vector<RunSummary> runs;
    for (const auto& d : dirs) runs.push_back(load_run(d));
    const RunSummary* ref = nullptr;
    for (const auto& r : runs)
        if (r.error.empty()) { ref = &r; break; }

    auto find = [](const RunSummary& r, Link l, PowerMode p) -> const SummaryRow* {
        for (const auto& row : r.rows)
            if (row.link == l && row.power == p) return &row;
        return nullptr;
    };
    out << std::left << std::setw(28) << "run" << std::setw(11) << "paradigm" << std::setw(5) << "link"
        << std::setw(12) << "power" << std::right << std::setw(11) << "p5" << std::setw(11) << "p50" << std::setw(11)
        << "d_p5" << std::setw(11) << "d_p50" << std::setw(7) << "links" << std::setw(11) << "reduction" << '\n';
    out << std::fixed << std::setprecision(4);
    bool any_error = false;
    for (const auto& r : runs) {
        if (!r.error.empty()) {
            any_error = true;
            out << std::left << std::setw(28) << r.dir << "error: " << r.error << '\n';
            continue;
        }
        for (const auto& row : r.rows) {
            const SummaryRow* base = find(*ref, row.link, row.power);
            out << std::left << std::setw(28) << r.dir << std::setw(11) << r.paradigm << std::setw(5)
                << link_name(row.link) << std::setw(12) << power_mode_name(row.power) << std::right << std::setw(11)
                << row.p5 << std::setw(11) << row.p50;
            if (base) out << std::setw(11) << row.p5 - base->p5 << std::setw(11) << row.p50 - base->p50;
            else out << std::setw(11) << "-" << std::setw(11) << "-";
            out << std::setw(7) << r.cost.fronthaul_links << std::setw(11) << r.cost.reduction_vs_cellfree << '\n';
        }
    }
    out << std::defaultfloat;
    for (Link l : {Link::DL, Link::UL})
        for (PowerMode p : {PowerMode::FullEqual, PowerMode::MaxMin}) {
            std::vector<std::pair<std::string, double>> p5;
            for (const auto& r : runs)
                if (const SummaryRow* row = r.error.empty() ? find(r, l, p) : nullptr) p5.emplace_back(r.dir, row->p5);
            if (p5.size() >= 2) out << "ordering " << link_name(l) << ' ' << power_mode_name(p) << ": " << ordering_line(p5) << '\n';
        }
    return any_error ? kExitRuntime : kExitOk;
}

// ---------------------------------------------------------------------------

inline int run_cli(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Monte Carlo spectral-efficiency simulator for cellular, cell-free and heterogeneous massive MIMO"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    RunRequest req;
    auto* run = app.add_subcommand("run", "simulate one scenario and write CSV outputs");
    auto* preset_opt = run->add_option("--preset", req.preset, "preset name (see `presets`)");
    auto* config_opt = run->add_option("--config", req.config_path, "key = value config file")->check(CLI::ExistingFile);
    preset_opt->excludes(config_opt);
    run->add_option("--epochs", req.epochs, "number of drop epochs")->check(CLI::NonNegativeNumber);
    run->add_option("--seed", req.seed, "master seed");
    run->add_option("--out", req.out, "output directory (created if missing)");
    run->add_option("--workers", req.workers, "worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
    run->add_option("--link", req.link, "link direction")->check(CLI::IsMember({"ul", "dl", "both"}));
    run->add_option("--power", req.power, "power control")->check(CLI::IsMember({"full-equal", "maxmin", "both"}));

    auto* presets = app.add_subcommand("presets", "list built-in presets and their fronthaul cost");

    ValidationSuiteOptions vopt;
    auto* val = app.add_subcommand("validate", "run the oracle and property suites on fixed-seed toys");
    val->add_option("--seed", vopt.seed, "suite seed");
    val->add_option("--trials", vopt.oracle_trials, "Monte Carlo trials per oracle instance")->check(CLI::Range(10000L, 100000000L));

    std::vector<std::string> dirs;
    auto* cmp = app.add_subcommand("compare", "tabulate p5/median SE and cost of finished runs");
    cmp->add_option("dirs", dirs, "run directories")->required()->expected(2, -1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*run) return cmd_run(req, out, err);
        if (*presets) return cmd_presets(out);
        if (*val) return cmd_validate(vopt, out);
        if (*cmp) return cmd_compare(dirs, out);
    } catch (const CLI::Error& e) {
        err << e.what() << '\n';
        return kExitUsage;
    } catch (const ConfigParseError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}

}  // namespace hetmimo
