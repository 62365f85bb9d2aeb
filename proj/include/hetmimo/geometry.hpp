#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <vector>

#include "config.hpp"
#include "rng.hpp"

namespace hetmimo {

struct Point {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Point&) const = default;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct PlacedNode {
    int cell = 0;
    Point pos;
    double orientation = 0.0;  // array broadside azimuth, radians; unused for users

    bool operator==(const PlacedNode&) const = default;
};

/// Positions and cell memberships of one epoch's drop.
struct NetworkLayout {
    std::vector<PlacedNode> cbs;    // one per cell, at the cell center (empty for CellFree)
    std::vector<PlacedNode> eaps;   // eAPs (Hetero) or APs (CellFree)
    std::vector<PlacedNode> users;  // serving cell index per user
    double area_side = 0.0;

    bool operator==(const NetworkLayout&) const = default;
};

/// Cell index of the square containing `p` (row-major over the cell grid).
inline int containing_cell(const ScenarioConfig& cfg, Point p) {
    const int side = cfg.cells_per_side();
    const double w = cfg.cell_side();
    const int col = std::clamp(static_cast<int>(std::floor(p.x / w)), 0, side - 1);
    const int row = std::clamp(static_cast<int>(std::floor(p.y / w)), 0, side - 1);
    return row * side + col;
}

inline Point cell_origin(const ScenarioConfig& cfg, int cell) {
    const int side = cfg.cells_per_side();
    const double w = cfg.cell_side();
    return {(cell % side) * w, (cell / side) * w};
}

inline Point cell_center(const ScenarioConfig& cfg, int cell) {
    const Point o = cell_origin(cfg, cell);
    const double h = cfg.cell_side() / 2;
    return {o.x + h, o.y + h};
}

namespace detail {

inline Point uniform_in_square(Rng& rng, Point origin, double side) {
    const double x = draw_uniform(rng, 0.0, side);
    const double y = draw_uniform(rng, 0.0, side);
    return {origin.x + x, origin.y + y};
}

// Uniform over the ring of width `band` along the inside of the square border.
inline Point uniform_in_edge_band(Rng& rng, Point origin, double side, double band) {
    for (;;) {
        const Point p = uniform_in_square(rng, origin, side);
        const double dx = std::min(p.x - origin.x, origin.x + side - p.x);
        const double dy = std::min(p.y - origin.y, origin.y + side - p.y);
        if (std::min(dx, dy) <= band) return p;
    }
}

}  // namespace detail

/// Draws node and user positions for one epoch. cBSs sit at cell centers;
/// eAPs/APs and users are uniform (per cell for balanced drops).
inline NetworkLayout generate_layout(const ScenarioConfig& cfg, Rng& rng) {
    NetworkLayout layout;
    layout.area_side = cfg.area_side;
    const double w = cfg.cell_side();
    auto orientation = [&] { return draw_uniform(rng, 0.0, 2 * kPi); };

    if (cfg.paradigm != Paradigm::CellFree) {
        for (int c = 0; c < cfg.num_cells; ++c) layout.cbs.push_back({c, cell_center(cfg, c), orientation()});
    }

    if (cfg.paradigm == Paradigm::CellFree) {
        for (int l = 0; l < cfg.eap_count; ++l) {
            const Point p = detail::uniform_in_square(rng, {0, 0}, cfg.area_side);
            layout.eaps.push_back({0, p, orientation()});
        }
    } else {
        for (int c = 0; c < cfg.num_cells; ++c) {
            const Point o = cell_origin(cfg, c);
            for (int l = 0; l < cfg.eap_count; ++l) {
                const Point p = cfg.eap_placement == EapPlacement::EdgeBand
                                    ? detail::uniform_in_edge_band(rng, o, w, cfg.edge_band_width)
                                    : detail::uniform_in_square(rng, o, w);
                layout.eaps.push_back({c, p, orientation()});
            }
        }
    }

    if (cfg.paradigm == Paradigm::CellFree) {
        for (int k = 0; k < cfg.users_total; ++k)
            layout.users.push_back({0, detail::uniform_in_square(rng, {0, 0}, cfg.area_side), 0.0});
    } else if (cfg.balanced_drop) {
        for (int c = 0; c < cfg.num_cells; ++c) {
            const Point o = cell_origin(cfg, c);
            for (int k = 0; k < cfg.users_per_cell(); ++k)
                layout.users.push_back({c, detail::uniform_in_square(rng, o, w), 0.0});
        }
    } else {
        for (int k = 0; k < cfg.users_total; ++k) {
            const Point p = detail::uniform_in_square(rng, {0, 0}, cfg.area_side);
            layout.users.push_back({containing_cell(cfg, p), p, 0.0});
        }
    }
    return layout;
}

// ---------------------------------------------------------------------------
// Infrastructure accounting

inline constexpr int kCellFreeBaselineSites = 128;

struct CostReport {
    int ap_sites = 0;
    int fronthaul_links = 0;
    double reduction_vs_cellfree = 0.0;
};

/// Distributed sites and star-fronthaul links, relative to the 128-AP cell-free
/// baseline.
inline CostReport fronthaul_cost(const ScenarioConfig& cfg) {
    CostReport r;
    switch (cfg.paradigm) {
    case Paradigm::Cellular: r.ap_sites = 0; break;
    case Paradigm::CellFree: r.ap_sites = cfg.eap_count; break;
    case Paradigm::Hetero: r.ap_sites = cfg.num_cells * cfg.eap_count; break;
    }
    r.fronthaul_links = r.ap_sites;
    r.reduction_vs_cellfree = 1.0 - static_cast<double>(r.ap_sites) / kCellFreeBaselineSites;
    return r;
}

/// CSV dump: entity_type,cell,x_m,y_m,orientation_rad.
inline void write_layout_csv(std::ostream& os, const NetworkLayout& layout) {
    os.precision(17);
    os << "entity_type,cell,x_m,y_m,orientation_rad\n";
    for (const auto& n : layout.cbs) os << "cbs," << n.cell << ',' << n.pos.x << ',' << n.pos.y << ',' << n.orientation << '\n';
    for (const auto& n : layout.eaps) os << "eap," << n.cell << ',' << n.pos.x << ',' << n.pos.y << ',' << n.orientation << '\n';
    for (const auto& n : layout.users) os << "user," << n.cell << ',' << n.pos.x << ',' << n.pos.y << ",\n";
}

}  // namespace hetmimo
