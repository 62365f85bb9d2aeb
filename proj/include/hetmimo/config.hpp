#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hetmimo {

enum class Paradigm { Cellular, CellFree, Hetero };
enum class PowerControl { FullEqual, MaxMin, Both };
enum class EstimatorNormalization { PaperVerbatim, StandardMMSE };
enum class LinkSelection { Uplink, Downlink, Both };
enum class EapPlacement { Uniform, EdgeBand };
enum class UlSampleMode { LayoutAveraged, PerDraw };
enum class MaxMinScope { PerCell, Network };
enum class DlMaxMinBase { Uniform, EqualShare };
enum class DlMaxMinSolver { Family, PerNode };
enum class ScatteringModel { Exact, ClosedForm };

enum class Preset { Cellular512, CellFree512, HeteroQuarter, HeteroHalf };

inline constexpr double kPi = 3.14159265358979323846;

/// Three-slope COST-Hata loss parameters. Distances in meters.
struct PathLossParams {
    double ref_db = 140.7;
    double d0 = 10.0;
    double d1 = 50.0;

    bool operator==(const PathLossParams&) const = default;
};

/// Full parameterization of one experiment.
///
/// For CellFree the whole area is a single pseudo-cell: `num_cells` is 1,
/// `eap_count` is the total AP count and `cbs_antennas` is 0.
struct ScenarioConfig {
    Paradigm paradigm = Paradigm::Hetero;
    int num_cells = 4;
    double area_side = 1000.0;
    int cbs_antennas = 32;
    int eap_count = 24;
    int eap_antennas = 4;
    int users_total = 32;

    int coherence_block = 200;
    int pilot_length = 8;

    double ue_power = 0.1;
    double dl_power = 0.2;
    double noise_power = 0.0;  // watts; set by presets from bandwidth and noise figure
    double bandwidth = 5e6;
    double noise_figure = 9.0;
    double shadowing_std = 8.0;
    double asd = 15.0 * kPi / 180.0;
    PathLossParams pathloss;
    double min_distance = 1.0;
    ScatteringModel scattering = ScatteringModel::Exact;

    PowerControl power_control = PowerControl::Both;
    LinkSelection link = LinkSelection::Both;
    EstimatorNormalization estimator_normalization = EstimatorNormalization::PaperVerbatim;
    MaxMinScope maxmin_scope = MaxMinScope::Network;
    DlMaxMinSolver dl_maxmin_solver = DlMaxMinSolver::PerNode;
    DlMaxMinBase dl_maxmin_base = DlMaxMinBase::EqualShare;

    bool balanced_drop = true;
    EapPlacement eap_placement = EapPlacement::Uniform;
    double edge_band_width = 100.0;
    bool dl_prelog = false;
    UlSampleMode ul_sample_mode = UlSampleMode::LayoutAveraged;

    int epochs = 2000;
    int fading_draws_per_epoch = 10;
    std::uint64_t seed = 1;

    /// Users served by one cell (the single pseudo-cell for CellFree).
    int users_per_cell() const { return num_cells > 0 ? users_total / num_cells : 0; }
    /// Distributed nodes (eAPs or APs) attached to one cell.
    int eaps_per_cell() const { return eap_count; }
    /// Service antennas M_c of one cell.
    int antennas_per_cell() const { return cbs_antennas + eap_count * eap_antennas; }
    int total_antennas() const { return num_cells * antennas_per_cell(); }
    int cells_per_side() const { return static_cast<int>(std::lround(std::sqrt(static_cast<double>(num_cells)))); }
    double cell_side() const { return area_side / cells_per_side(); }
    bool has_cbs() const { return cbs_antennas > 0; }

    bool operator==(const ScenarioConfig&) const = default;
};

/// Thermal noise power in watts for a -174 dBm/Hz density.
inline double thermal_noise_watts(double bandwidth_hz, double noise_figure_db) {
    const double dbm = -174.0 + 10.0 * std::log10(bandwidth_hz) + noise_figure_db;
    return std::pow(10.0, (dbm - 30.0) / 10.0);
}

inline ScenarioConfig paradigm_preset(Preset name) {
    ScenarioConfig cfg;
    cfg.noise_power = thermal_noise_watts(cfg.bandwidth, cfg.noise_figure);
    switch (name) {
    case Preset::Cellular512:
        cfg.paradigm = Paradigm::Cellular;
        cfg.num_cells = 4;
        cfg.cbs_antennas = 128;
        cfg.eap_count = 0;
        cfg.eap_antennas = 4;
        cfg.maxmin_scope = MaxMinScope::PerCell;
        break;
    case Preset::CellFree512:
        cfg.paradigm = Paradigm::CellFree;
        cfg.num_cells = 1;
        cfg.cbs_antennas = 0;
        cfg.eap_count = 128;
        cfg.eap_antennas = 4;
        cfg.balanced_drop = false;
        break;
    case Preset::HeteroQuarter:
        cfg.paradigm = Paradigm::Hetero;
        cfg.num_cells = 4;
        cfg.cbs_antennas = 32;
        cfg.eap_count = 24;
        cfg.eap_antennas = 4;
        break;
    case Preset::HeteroHalf:
        cfg.paradigm = Paradigm::Hetero;
        cfg.num_cells = 4;
        cfg.cbs_antennas = 64;
        cfg.eap_count = 16;
        cfg.eap_antennas = 4;
        break;
    }
    return cfg;
}

inline const std::vector<std::pair<std::string, Preset>>& preset_names() {
    static const std::vector<std::pair<std::string, Preset>> names = {
        {"cellular-512", Preset::Cellular512},
        {"cell-free-512", Preset::CellFree512},
        {"hetero-quarter", Preset::HeteroQuarter},
        {"hetero-half", Preset::HeteroHalf},
    };
    return names;
}

inline std::optional<Preset> preset_from_name(std::string_view name) {
    for (const auto& [n, p] : preset_names())
        if (n == name) return p;
    return std::nullopt;
}

inline std::string preset_name(Preset p) {
    for (const auto& [n, q] : preset_names())
        if (q == p) return n;
    return "unknown";
}

// ---------------------------------------------------------------------------
// Validation

struct ValidationIssue {
    std::string field;
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;

    bool ok() const { return issues.empty(); }
    std::string to_string() const {
        std::ostringstream os;
        for (const auto& i : issues) os << i.field << ": " << i.message << '\n';
        return os.str();
    }
    bool mentions(std::string_view text) const {
        for (const auto& i : issues)
            if (i.message.find(text) != std::string::npos) return true;
        return false;
    }
};

inline ValidationReport validate(const ScenarioConfig& c) {
    ValidationReport r;
    auto fail = [&](std::string field, std::string msg) { r.issues.push_back({std::move(field), std::move(msg)}); };

    if (c.pilot_length >= c.coherence_block) fail("pilot_length", "τ_p < τ_c violated");
    // Pilot reuse only matters across cells; the cell-free pseudo-cell is contamination-free by assumption.
    if (c.paradigm != Paradigm::CellFree && c.pilot_length < c.users_per_cell())
        fail("pilot_length", "τ_p ≥ users_per_cell violated");

    if (c.num_cells <= 0) fail("num_cells", "must be positive");
    else if (c.cells_per_side() * c.cells_per_side() != c.num_cells)
        fail("num_cells", "must be a perfect square (square grid of cells)");
    if (c.paradigm == Paradigm::CellFree) {
        if (c.num_cells != 1) fail("num_cells", "cell-free uses a single pseudo-cell");
        if (c.cbs_antennas != 0) fail("cbs_antennas", "cell-free has no cBS");
        if (c.eap_count <= 0) fail("eap_count", "cell-free needs at least one AP");
    } else {
        if (c.cbs_antennas <= 0) fail("cbs_antennas", "must be positive");
        if (c.paradigm == Paradigm::Cellular && c.eap_count != 0) fail("eap_count", "cellular has no eAPs");
        if (c.paradigm == Paradigm::Hetero && c.eap_count <= 0) fail("eap_count", "hetero needs eAPs");
        if (c.num_cells > 0 && c.users_total % c.num_cells != 0)
            fail("users_total", "must be divisible by num_cells");
    }
    if (c.eap_count < 0) fail("eap_count", "must be nonnegative");
    if (c.eap_antennas <= 0) fail("eap_antennas", "must be positive");
    if (c.users_total <= 0) fail("users_total", "must be positive");
    if (c.coherence_block <= 0) fail("coherence_block", "must be positive");
    if (c.pilot_length <= 0) fail("pilot_length", "must be positive");
    if (!(c.area_side > 0)) fail("area_side", "must be positive");
    if (!(c.ue_power > 0)) fail("ue_power", "must be positive");
    if (!(c.dl_power > 0)) fail("dl_power", "must be positive");
    if (!(c.noise_power > 0)) fail("noise_power", "must be positive");
    if (!(c.bandwidth > 0)) fail("bandwidth", "must be positive");
    if (!(c.shadowing_std >= 0)) fail("shadowing_std", "must be nonnegative");
    if (!(c.asd > 0 && c.asd < kPi / 2)) fail("asd", "0 < asd < π/2 violated");
    if (!(c.pathloss.d0 > 0 && c.pathloss.d1 > c.pathloss.d0)) fail("pathloss", "need 0 < d0 < d1");
    if (!(c.min_distance > 0)) fail("min_distance", "must be positive");
    if (c.eap_placement == EapPlacement::EdgeBand &&
        !(c.edge_band_width > 0 && c.edge_band_width < c.cell_side() / 2))
        fail("edge_band_width", "must lie in (0, cell_side/2)");
    if (c.epochs < 0) fail("epochs", "must be nonnegative");
    if (c.fading_draws_per_epoch <= 0) fail("fading_draws_per_epoch", "must be positive");
    return r;
}

// ---------------------------------------------------------------------------
// Text serialization: one `key = value` per line, `#` starts a comment.

namespace detail {

template <class E>
struct EnumNames;

#define HETMIMO_ENUM_NAMES(E, ...)                                                    \
    template <>                                                                        \
    struct EnumNames<E> {                                                              \
        static const std::vector<std::pair<E, std::string_view>>& get() {              \
            static const std::vector<std::pair<E, std::string_view>> v = {__VA_ARGS__}; \
            return v;                                                                  \
        }                                                                              \
    };

HETMIMO_ENUM_NAMES(Paradigm, {Paradigm::Cellular, "cellular"}, {Paradigm::CellFree, "cell_free"},
                   {Paradigm::Hetero, "hetero"})
HETMIMO_ENUM_NAMES(PowerControl, {PowerControl::FullEqual, "full_equal"}, {PowerControl::MaxMin, "maxmin"},
                   {PowerControl::Both, "both"})
HETMIMO_ENUM_NAMES(EstimatorNormalization, {EstimatorNormalization::PaperVerbatim, "paper_verbatim"},
                   {EstimatorNormalization::StandardMMSE, "standard_mmse"})
HETMIMO_ENUM_NAMES(LinkSelection, {LinkSelection::Uplink, "ul"}, {LinkSelection::Downlink, "dl"},
                   {LinkSelection::Both, "both"})
HETMIMO_ENUM_NAMES(EapPlacement, {EapPlacement::Uniform, "uniform"}, {EapPlacement::EdgeBand, "edge_band"})
HETMIMO_ENUM_NAMES(UlSampleMode, {UlSampleMode::LayoutAveraged, "layout_averaged"},
                   {UlSampleMode::PerDraw, "per_draw"})
HETMIMO_ENUM_NAMES(MaxMinScope, {MaxMinScope::PerCell, "per_cell"}, {MaxMinScope::Network, "network"})
HETMIMO_ENUM_NAMES(DlMaxMinBase, {DlMaxMinBase::Uniform, "uniform"}, {DlMaxMinBase::EqualShare, "equal_share"})
HETMIMO_ENUM_NAMES(DlMaxMinSolver, {DlMaxMinSolver::Family, "family"}, {DlMaxMinSolver::PerNode, "per_node"})
HETMIMO_ENUM_NAMES(ScatteringModel, {ScatteringModel::Exact, "exact"}, {ScatteringModel::ClosedForm, "closed_form"})

#undef HETMIMO_ENUM_NAMES

inline std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace detail

template <class E>
std::string to_string(E e) {
    for (const auto& [v, n] : detail::EnumNames<E>::get())
        if (v == e) return std::string(n);
    throw std::invalid_argument("unnamed enum value");
}

template <class E>
E enum_from_string(std::string_view s) {
    for (const auto& [v, n] : detail::EnumNames<E>::get())
        if (n == s) return v;
    std::string allowed;
    for (const auto& [v, n] : detail::EnumNames<E>::get()) allowed += std::string(allowed.empty() ? "" : ", ") + std::string(n);
    throw std::invalid_argument("unknown value '" + std::string(s) + "' (expected one of: " + allowed + ")");
}

class ConfigParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

// Binds each config key to a getter and setter on ScenarioConfig.
struct FieldBinding {
    std::string_view key;
    std::string (*get)(const ScenarioConfig&);
    void (*set)(ScenarioConfig&, const std::string&);
};

inline double parse_double(const std::string& s) {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters in number '" + s + "'");
    return v;
}
inline long long parse_int(const std::string& s) {
    std::size_t pos = 0;
    long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("not an integer: '" + s + "'");
    return v;
}
inline bool parse_bool(const std::string& s) {
    if (s == "true" || s == "1" || s == "on") return true;
    if (s == "false" || s == "0" || s == "off") return false;
    throw std::invalid_argument("not a boolean: '" + s + "'");
}

#define HETMIMO_FIELD_D(name, member)                                                     \
    FieldBinding{name, [](const ScenarioConfig& c) { return format_double(c.member); }, \
                 [](ScenarioConfig& c, const std::string& v) { c.member = parse_double(v); }}
#define HETMIMO_FIELD_I(name, member)                                                    \
    FieldBinding{name, [](const ScenarioConfig& c) { return std::to_string(c.member); }, \
                 [](ScenarioConfig& c, const std::string& v) { c.member = static_cast<decltype(c.member)>(parse_int(v)); }}
#define HETMIMO_FIELD_B(name, member)                                                             \
    FieldBinding{name, [](const ScenarioConfig& c) { return std::string(c.member ? "true" : "false"); }, \
                 [](ScenarioConfig& c, const std::string& v) { c.member = parse_bool(v); }}
#define HETMIMO_FIELD_E(name, member)                                               \
    FieldBinding{name, [](const ScenarioConfig& c) { return to_string(c.member); }, \
                 [](ScenarioConfig& c, const std::string& v) { c.member = enum_from_string<decltype(c.member)>(v); }}

inline const std::vector<FieldBinding>& field_bindings() {
    static const std::vector<FieldBinding> fields = {
        HETMIMO_FIELD_E("paradigm", paradigm),
        HETMIMO_FIELD_I("num_cells", num_cells),
        HETMIMO_FIELD_D("area_side", area_side),
        HETMIMO_FIELD_I("cbs_antennas", cbs_antennas),
        HETMIMO_FIELD_I("eap_count", eap_count),
        HETMIMO_FIELD_I("eap_antennas", eap_antennas),
        HETMIMO_FIELD_I("users_total", users_total),
        HETMIMO_FIELD_I("coherence_block", coherence_block),
        HETMIMO_FIELD_I("pilot_length", pilot_length),
        HETMIMO_FIELD_D("ue_power", ue_power),
        HETMIMO_FIELD_D("dl_power", dl_power),
        HETMIMO_FIELD_D("noise_power", noise_power),
        HETMIMO_FIELD_D("bandwidth", bandwidth),
        HETMIMO_FIELD_D("noise_figure", noise_figure),
        HETMIMO_FIELD_D("shadowing_std", shadowing_std),
        HETMIMO_FIELD_D("asd", asd),
        HETMIMO_FIELD_D("pathloss_ref_db", pathloss.ref_db),
        HETMIMO_FIELD_D("pathloss_d0", pathloss.d0),
        HETMIMO_FIELD_D("pathloss_d1", pathloss.d1),
        HETMIMO_FIELD_D("min_distance", min_distance),
        HETMIMO_FIELD_E("scattering", scattering),
        HETMIMO_FIELD_E("power_control", power_control),
        HETMIMO_FIELD_E("link", link),
        HETMIMO_FIELD_E("estimator_normalization", estimator_normalization),
        HETMIMO_FIELD_E("maxmin_scope", maxmin_scope),
        HETMIMO_FIELD_E("dl_maxmin_solver", dl_maxmin_solver),
        HETMIMO_FIELD_E("dl_maxmin_base", dl_maxmin_base),
        HETMIMO_FIELD_B("balanced_drop", balanced_drop),
        HETMIMO_FIELD_E("eap_placement", eap_placement),
        HETMIMO_FIELD_D("edge_band_width", edge_band_width),
        HETMIMO_FIELD_B("dl_prelog", dl_prelog),
        HETMIMO_FIELD_E("ul_sample_mode", ul_sample_mode),
        HETMIMO_FIELD_I("epochs", epochs),
        HETMIMO_FIELD_I("fading_draws_per_epoch", fading_draws_per_epoch),
        HETMIMO_FIELD_I("seed", seed),
    };
    return fields;
}

#undef HETMIMO_FIELD_D
#undef HETMIMO_FIELD_I
#undef HETMIMO_FIELD_B
#undef HETMIMO_FIELD_E

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

}  // namespace detail

inline std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const auto& f : detail::field_bindings()) keys.emplace_back(f.key);
    return keys;
}

/// Sets one field from its textual value. Throws ConfigParseError on an unknown
/// key or malformed value.
inline void set_field(ScenarioConfig& cfg, std::string_view key, const std::string& value) {
    for (const auto& f : detail::field_bindings()) {
        if (f.key != key) continue;
        try {
            f.set(cfg, value);
        } catch (const std::exception& e) {
            throw ConfigParseError("bad value for '" + std::string(key) + "': " + e.what());
        }
        return;
    }
    throw ConfigParseError("unknown config key '" + std::string(key) + "'");
}

inline std::string get_field(const ScenarioConfig& cfg, std::string_view key) {
    for (const auto& f : detail::field_bindings())
        if (f.key == key) return f.get(cfg);
    throw ConfigParseError("unknown config key '" + std::string(key) + "'");
}

inline std::string render(const ScenarioConfig& cfg) {
    std::ostringstream os;
    for (const auto& f : detail::field_bindings()) os << f.key << " = " << f.get(cfg) << '\n';
    return os.str();
}

/// Parses `key = value` text on top of `base`; keys not mentioned keep the base value.
inline ScenarioConfig parse(std::string_view text, ScenarioConfig base = paradigm_preset(Preset::HeteroQuarter)) {
    std::istringstream is{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        const auto t = detail::trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigParseError("line " + std::to_string(lineno) + ": expected 'key = value'");
        set_field(base, detail::trim(std::string_view(t).substr(0, eq)), detail::trim(std::string_view(t).substr(eq + 1)));
    }
    return base;
}

/// Applies `<prefix><KEY>` environment variables (key upper-cased) on top of `cfg`.
inline ScenarioConfig apply_env_overrides(ScenarioConfig cfg, std::string_view prefix = "HETMIMO_") {
    for (const auto& key : config_keys()) {
        std::string name(prefix);
        for (char ch : key) name += static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
        if (const char* v = std::getenv(name.c_str())) set_field(cfg, key, v);
    }
    return cfg;
}

}  // namespace hetmimo
