#include <gtest/gtest.h>

#include "hetmimo/validation.hpp"

using namespace hetmimo;

namespace {

// Node loads Σ_j η_j·tr Φ_j of an allocation.
std::vector<double> loads(const DownlinkStatistics& st, const PowerAllocation& p) {
    std::vector<double> out;
    for (std::size_t n = 0; n < st.nodes.size(); ++n) {
        double s = 0.0;
        for (std::size_t j = 0; j < st.users(); ++j)
            if (st.user_cell[j] == st.nodes[n].cell) s += p.dl_eta[n][j] * st.nodes[n].est_cov[j].trace().real();
        out.push_back(s);
    }
    return out;
}

DownlinkStatistics single_node(std::vector<CMatrix> corr, const EstimationParams& p) {
    DownlinkStatistics st;
    st.noise_power = 0.05;
    DlNodeStats node;
    for (const auto& r : corr) {
        st.user_cell.push_back(0);
        node.corr.push_back(r);
        node.est_cov.push_back(estimation_stats(r, p).est_cov);
    }
    node.eta.assign(corr.size(), 0.0);
    st.nodes = {node};
    return st;
}

const EstimationParams kToyParams{0.1, 4, 0.05, EstimatorNormalization::StandardMMSE};

}  // namespace

TEST(FullPower, AllOnes) {
    EXPECT_EQ(full_power_ul(32).ul_eta, std::vector<double>(32, 1.0));
    EXPECT_EQ(full_power_ul(1).ul_eta, std::vector<double>{1.0});
}

TEST(EqualPower, BudgetIsExhausted) {
    Rng rng(1);
    for (int rep = 0; rep < 30; ++rep) {
        const DownlinkStatistics st = toy_downlink(random_toy(rng));
        for (double l : loads(st, equal_power_dl(st))) EXPECT_NEAR(l, 1.0, 1e-9);
    }
}

TEST(EqualPower, SymmetricAndSingleUser) {
    const CMatrix r = local_scattering_R(1.0, 0.3, 0.2, 4);
    const auto two = single_node({r, r}, kToyParams);
    const auto p = equal_power_dl(two);
    EXPECT_DOUBLE_EQ(p.dl_eta[0][0], p.dl_eta[0][1]);
    EXPECT_NEAR(loads(two, p)[0], 1.0, 1e-12);
    const auto one = single_node({r}, kToyParams);
    EXPECT_NEAR(equal_power_dl(one).dl_eta[0][0], 1.0 / one.nodes[0].est_cov[0].trace().real(), 1e-12);
}

TEST(MaxMinUl, SingleUserUsesFullPower) {
    Rng rng(2);
    const UplinkRealization r = toy_uplink(random_toy(rng, {1, 1, 1, 4}), rng);
    EXPECT_NEAR(maxmin_ul(r).ul_eta[0], 1.0, 1e-12);
}

TEST(MaxMinUl, SymmetricUsers) {
    UplinkRealization r;
    r.ue_power = 0.1;
    r.noise_power = 0.05;
    r.eta = {1.0, 1.0};
    CellObservation obs;
    obs.own_users = {0, 1};
    obs.estimates = {CVector::Constant(2, 1.0), CVector::Constant(2, 1.0)};
    obs.err_cov = {0.1 * CMatrix::Identity(2, 2), 0.1 * CMatrix::Identity(2, 2)};
    r.cells = {obs};
    const auto p = maxmin_ul(r);
    EXPECT_NEAR(p.ul_eta[0], p.ul_eta[1], 1e-9);
    EXPECT_NEAR(ul_sinr(r, 0, 0), ul_sinr(r, 0, 1), 1e-9);
}

TEST(MaxMinUl, NeverBelowFullPowerAndWithinBounds) {
    Rng rng(3);
    for (int rep = 0; rep < 50; ++rep) {
        const UplinkRealization r = toy_uplink(random_toy(rng, {2, 3, 2, 4}), rng);
        const SinrSystem s = ul_system(r);
        const auto p = maxmin_ul(r);
        for (double e : p.ul_eta) {
            EXPECT_GE(e, 0.0);
            EXPECT_LE(e, 1.0 + 1e-9);
        }
        EXPECT_GE(p.achieved_min_sinr, s.sinr(RVector::Ones(s.size())).minCoeff() * (1 - 1e-12));
    }
}

TEST(MaxMinUl, GridOracle) {
    Rng rng(4);
    for (int rep = 0; rep < 10; ++rep) {
        ToyNetwork t = random_toy(rng, {2, 2, 1, 4});
        while (t.users() != 2) t = random_toy(rng, {2, 2, 1, 4});
        const auto g = ul_grid_check(toy_uplink(t, rng));
        EXPECT_TRUE(g.passes()) << g.solver << " vs " << g.oracle;
    }
}

TEST(MinimalPowers, AgreesWithFixedPoint) {
    Rng rng(5);
    for (int rep = 0; rep < 30; ++rep) {
        const SinrSystem s = ul_system(toy_uplink(random_toy(rng, {2, 3, 1, 6}), rng));
        const double t = 0.5 * s.sinr(RVector::Ones(s.size())).minCoeff();
        RVector a, b;
        ASSERT_TRUE(minimal_powers(s, t, a));
        ASSERT_TRUE(fixed_point_powers(s, t, b, 100000));
        EXPECT_LT((a - b).norm(), 1e-8 * a.norm());
    }
}

TEST(MaxMinDl, SingleUserBudgetBinds) {
    const auto st = single_node({local_scattering_R(1.0, 0.1, 0.3, 4)}, kToyParams);
    for (auto solver : {DlMaxMinSolver::Family, DlMaxMinSolver::PerNode}) {
        const auto p = maxmin_dl(st, solver);
        EXPECT_NEAR(p.dl_eta[0][0], 1.0 / st.nodes[0].est_cov[0].trace().real(), 1e-9);
    }
}

TEST(MaxMinDl, SymmetricUsersEqualSinr) {
    const CMatrix r = local_scattering_R(1.0, 0.3, 0.2, 4);
    auto st = single_node({r, r}, kToyParams);
    for (auto solver : {DlMaxMinSolver::Family, DlMaxMinSolver::PerNode}) {
        apply_dl(st, maxmin_dl(st, solver));
        EXPECT_NEAR(dl_sinr(st, 0), dl_sinr(st, 1), 1e-6 * dl_sinr(st, 0));
    }
}

TEST(MaxMinDl, FeasibleAndOrdered) {
    Rng rng(6);
    for (int rep = 0; rep < 30; ++rep) {
        const DownlinkStatistics st = toy_downlink(random_toy(rng, {2, 3, 2, 4}));
        double eq = INFINITY;
        for (std::size_t k = 0; k < st.users(); ++k) eq = std::min(eq, dl_sinr(st, static_cast<int>(k)));
        const auto fam = maxmin_dl(st, DlMaxMinSolver::Family);
        const auto node = maxmin_dl(st, DlMaxMinSolver::PerNode);
        for (const auto* p : {&fam, &node})
            for (double l : loads(st, *p)) EXPECT_LE(l, 1.0 + 1e-9);
        EXPECT_GE(fam.achieved_min_sinr, eq * (1 - 1e-9));
        EXPECT_GE(node.achieved_min_sinr, fam.achieved_min_sinr * (1 - 1e-3));
        DownlinkStatistics applied = st;
        apply_dl(applied, node);
        for (std::size_t k = 0; k < st.users(); ++k)
            EXPECT_GE(dl_sinr(applied, static_cast<int>(k)), node.achieved_min_sinr * (1 - 1e-9));
    }
}

TEST(MaxMinDl, FamilyGridOracle) {
    Rng rng(7);
    for (int rep = 0; rep < 10; ++rep) {
        ToyNetwork t = random_toy(rng, {2, 2, 1, 4});
        while (t.users() != 2) t = random_toy(rng, {2, 2, 1, 4});
        const DownlinkStatistics st = toy_downlink(t);
        for (auto base : {DlMaxMinBase::Uniform, DlMaxMinBase::EqualShare}) {
            const auto g = dl_family_grid_check(st, base);
            EXPECT_TRUE(g.passes()) << g.solver << " vs " << g.oracle;
        }
    }
}

TEST(MaxMinDl, PerNodeGridOracle) {
    Rng rng(8);
    for (int rep = 0; rep < 10; ++rep) {
        ToyNetwork t = random_toy(rng, {1, 2, 2, 4});
        while (t.users() != 2) t = random_toy(rng, {1, 2, 2, 4});
        const auto g = dl_per_node_grid_check(toy_downlink(t));
        EXPECT_TRUE(g.passes()) << g.solver << " vs " << g.oracle;
    }
}

TEST(MaxMinScoped, GroupsDesignIndependently) {
    Rng rng(9);
    const SinrSystem s = ul_system(toy_uplink(random_toy(rng, {2, 3, 1, 4}), rng));
    const RVector ones = RVector::Ones(s.size());
    const MaxMinResult joint = solve_maxmin_scoped(s, ones, {});
    std::vector<Index> all(static_cast<std::size_t>(s.size()));
    for (Index k = 0; k < s.size(); ++k) all[k] = k;
    const MaxMinResult one_group = solve_maxmin_scoped(s, ones, {all});
    EXPECT_NEAR(joint.min_sinr, one_group.min_sinr, 1e-12 * joint.min_sinr);
}
