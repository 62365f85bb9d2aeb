#include <gtest/gtest.h>

#include <sstream>

#include "hetmimo/geometry.hpp"

using namespace hetmimo;

TEST(Layout, HeteroQuarterCenters) {
    const auto cfg = paradigm_preset(Preset::HeteroQuarter);
    Rng rng(5);
    const auto l = generate_layout(cfg, rng);
    ASSERT_EQ(l.cbs.size(), 4u);
    const Point centers[] = {{250, 250}, {750, 250}, {250, 750}, {750, 750}};
    for (int c = 0; c < 4; ++c) EXPECT_EQ(l.cbs[c].pos, centers[c]);
    EXPECT_EQ(l.eaps.size(), 96u);
    EXPECT_EQ(l.users.size(), 32u);
}

TEST(Layout, CellFreeShape) {
    const auto cfg = paradigm_preset(Preset::CellFree512);
    Rng rng(5);
    const auto l = generate_layout(cfg, rng);
    EXPECT_TRUE(l.cbs.empty());
    EXPECT_EQ(l.eaps.size(), 128u);
    EXPECT_EQ(l.users.size(), 32u);
    for (const auto& u : l.users) EXPECT_EQ(u.cell, 0);
}

TEST(Layout, InvariantsHoldForEveryPreset) {
    for (const auto& [name, p] : preset_names()) {
        for (bool balanced : {true, false}) {
            auto cfg = paradigm_preset(p);
            cfg.balanced_drop = balanced;
            Rng rng(11);
            const auto l = generate_layout(cfg, rng);
            auto inside = [&](Point q) { return q.x >= 0 && q.y >= 0 && q.x <= cfg.area_side && q.y <= cfg.area_side; };
            for (const auto* group : {&l.cbs, &l.eaps, &l.users})
                for (const auto& n : *group) EXPECT_TRUE(inside(n.pos)) << name;
            for (const auto& u : l.users) {
                const int expect = cfg.paradigm == Paradigm::CellFree ? 0 : containing_cell(cfg, u.pos);
                EXPECT_EQ(u.cell, expect) << name;
            }
            for (const auto& e : l.eaps)
                if (cfg.paradigm == Paradigm::Hetero) EXPECT_EQ(containing_cell(cfg, e.pos), e.cell);
        }
    }
}

TEST(Layout, Deterministic) {
    const auto cfg = paradigm_preset(Preset::HeteroHalf);
    Rng a(99), b(99);
    EXPECT_EQ(generate_layout(cfg, a), generate_layout(cfg, b));
}

TEST(Layout, EdgeBandPlacement) {
    auto cfg = paradigm_preset(Preset::HeteroQuarter);
    cfg.eap_placement = EapPlacement::EdgeBand;
    cfg.edge_band_width = 60.0;
    Rng rng(3);
    const auto l = generate_layout(cfg, rng);
    for (const auto& e : l.eaps) {
        const Point o = cell_origin(cfg, e.cell);
        const double w = cfg.cell_side();
        const double edge = std::min({e.pos.x - o.x, o.x + w - e.pos.x, e.pos.y - o.y, o.y + w - e.pos.y});
        EXPECT_LE(edge, 60.0);
    }
}

TEST(Cost, FronthaulLinks) {
    const struct { Preset p; int links; double red; } rows[] = {{Preset::CellFree512, 128, 0.0},
                                                                 {Preset::HeteroQuarter, 96, 0.25},
                                                                 {Preset::HeteroHalf, 64, 0.5},
                                                                 {Preset::Cellular512, 0, 1.0}};
    for (const auto& r : rows) {
        const auto c = fronthaul_cost(paradigm_preset(r.p));
        EXPECT_EQ(c.fronthaul_links, r.links);
        EXPECT_EQ(c.reduction_vs_cellfree, r.red);
    }
}

TEST(Layout, CsvDump) {
    const auto cfg = paradigm_preset(Preset::HeteroHalf);
    Rng rng(1);
    std::ostringstream os;
    write_layout_csv(os, generate_layout(cfg, rng));
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "entity_type,cell,x_m,y_m,orientation_rad");
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    EXPECT_EQ(rows, 4 + 64 + 32);
}
