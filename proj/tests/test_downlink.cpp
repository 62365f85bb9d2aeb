#include <gtest/gtest.h>

#include "hetmimo/validation.hpp"

using namespace hetmimo;

TEST(DownlinkSe, Values) {
    EXPECT_DOUBLE_EQ(dl_se(0.0), 0.0);
    EXPECT_DOUBLE_EQ(dl_se(1.0), 1.0);
    EXPECT_DOUBLE_EQ(dl_se(3.0), 2.0);
}

TEST(DownlinkSinr, ZeroPower) {
    Rng rng(1);
    ToyNetwork t = random_toy(rng);
    DownlinkStatistics s = toy_downlink(t);
    for (auto& n : s.nodes) std::fill(n.eta.begin(), n.eta.end(), 0.0);
    for (int k = 0; k < t.users(); ++k) EXPECT_EQ(dl_sinr(s, k), 0.0);
}

TEST(DownlinkSinr, ScalarReduction) {
    const double beta = 0.8, pu = 0.1, tp = 4, noise = 0.05, eta = 0.6, pd = 0.2;
    DownlinkStatistics s;
    s.user_cell = {0};
    s.dl_power = pd;
    s.noise_power = 0.01;
    EstimationParams p{pu, 4, noise, EstimatorNormalization::StandardMMSE};
    DlNodeStats node;
    node.corr = {beta * CMatrix::Identity(3, 3)};
    node.est_cov = {estimation_stats(node.corr[0], p).est_cov};
    node.eta = {eta};
    s.nodes = {node};
    const double phi = beta * beta * pu * tp / (pu * tp * beta + noise);
    const double expect = eta * 9.0 * phi * phi / (eta * 3.0 * beta * phi + s.noise_power / pd);
    EXPECT_NEAR(dl_sinr(s, 0), expect, 1e-12 * expect);
}

// Expands every term by explicit matrix products over the node list.
TEST(DownlinkSinr, IndependentExpansion) {
    Rng rng(4);
    for (int rep = 0; rep < 20; ++rep) {
        const ToyNetwork t = random_toy(rng, {2, 3, 2, 4});
        const DownlinkStatistics s = toy_downlink(t);
        for (int k = 0; k < t.users(); ++k) {
            double mean = 0.0, interf = s.noise_power / s.dl_power;
            for (const auto& n : s.nodes)
                for (int j = 0; j < t.users(); ++j) {
                    if (s.user_cell[j] != n.cell) continue;
                    const CMatrix prod = n.corr[k] * n.est_cov[j];
                    interf += n.eta[j] * prod.trace().real();
                    if (j == k) mean += std::sqrt(n.eta[j]) * n.est_cov[j].trace().real();
                }
            const double expect = mean * mean / interf;
            EXPECT_NEAR(dl_sinr(s, k), expect, 1e-10 * expect);
        }
    }
}

TEST(DownlinkOracle, GenericInstances) {
    Rng rng(31);
    for (int rep = 0; rep < 5; ++rep) {
        const ToyNetwork t = random_toy(rng, {2, 3, 2, 6});
        const DownlinkStatistics s = toy_downlink(t);
        EXPECT_TRUE(dl_term_oracle(s, 0, rng, 20000).passes());
    }
}

TEST(DownlinkOracle, SingleUserPerCellHasNoIntraCellTerm) {
    Rng rng(32);
    ToyNetwork t = random_toy(rng, {2, 1, 1, 4});
    const DownlinkStatistics s = toy_downlink(t);
    const auto rep = dl_term_oracle(s, 0, rng, 10000);
    EXPECT_EQ(rep.terms[3].empirical, 0.0);
    EXPECT_EQ(rep.terms[3].closed_form, 0.0);
}

TEST(DownlinkOracle, ZeroPower) {
    Rng rng(33);
    DownlinkStatistics s = toy_downlink(random_toy(rng));
    for (auto& n : s.nodes) std::fill(n.eta.begin(), n.eta.end(), 0.0);
    const auto rep = dl_term_oracle(s, 0, rng, 10000);
    for (const auto& term : rep.terms) EXPECT_EQ(term.closed_form, 0.0) << term.name;
    EXPECT_TRUE(rep.passes());
}
