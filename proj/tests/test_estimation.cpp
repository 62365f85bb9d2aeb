#include <gtest/gtest.h>

#include "hetmimo/propagation.hpp"
#include "hetmimo/estimation.hpp"
#include "hetmimo/validation.hpp"

using namespace hetmimo;

namespace {
EstimationParams params(EstimatorNormalization mode) {
    EstimationParams p;
    p.ue_power = 0.1;
    p.pilot_length = 8;
    p.noise_power = 1.58e-13;
    p.mode = mode;
    return p;
}
}  // namespace

TEST(Estimation, DiagonalVerbatim) {
    const double beta = 3e-11;
    const auto p = params(EstimatorNormalization::PaperVerbatim);
    const auto s = estimation_stats(beta * CMatrix::Identity(4, 4), p);
    const double tp = p.pilot_length, pu = p.ue_power;
    const double expect = pu * beta * beta / (tp * (pu * tp * beta + p.noise_power));
    EXPECT_LT((s.est_cov - expect * CMatrix::Identity(4, 4)).norm(), 1e-12 * expect);
}

TEST(Estimation, DiagonalStandard) {
    const double beta = 3e-11;
    const auto p = params(EstimatorNormalization::StandardMMSE);
    const auto s = estimation_stats(beta * CMatrix::Identity(2, 2), p);
    const double snr = p.ue_power * p.pilot_length * beta;
    EXPECT_NEAR(s.est_cov(0, 0).real(), beta * snr / (snr + p.noise_power), 1e-12 * beta);
}

TEST(Estimation, IdentityAndPsdBothModes) {
    Rng rng(10);
    for (int i = 0; i < 500; ++i) {
        const CMatrix r = random_psd(1 + i % 8, rng, 1e-10);
        for (auto mode : {EstimatorNormalization::PaperVerbatim, EstimatorNormalization::StandardMMSE}) {
            const auto s = estimation_stats(r, params(mode));
            EXPECT_LE((s.est_cov + s.err_cov - r).norm(), 1e-12 * r.norm());
            EXPECT_TRUE(is_psd(s.est_cov, 1e-12));
            EXPECT_TRUE(is_psd(s.err_cov, 1e-12));
        }
    }
}

TEST(Estimation, SpectralMatchesDense) {
    for (auto mode : {EstimatorNormalization::PaperVerbatim, EstimatorNormalization::StandardMMSE}) {
        for (Index n : {1, 4, 7, 32}) {
            const CVector gen = scattering_generator(2e-10, 0.7, 0.25, n);
            const CMatrix r = toeplitz_from_generator(gen);
            const auto dense = estimation_stats(r, params(mode));
            const auto spectral = spectral_stats(gen, params(mode));
            EXPECT_NEAR(spectral.trace_phi(), dense.est_cov.trace().real(), 1e-9 * dense.est_cov.trace().real());
            const CMatrix phi = centro_expand(spectral.reduced_phi());
            EXPECT_LT((phi - dense.est_cov).norm(), 1e-8 * dense.est_cov.norm()) << n;
        }
    }
}

TEST(Estimation, PilotRegressionOracle) {
    Rng rng(42);
    EstimationParams p;
    p.ue_power = 0.1;
    p.pilot_length = 4;
    p.noise_power = 0.05;
    p.mode = EstimatorNormalization::StandardMMSE;
    const auto c = estimation_pilot_oracle(random_psd(4, rng), p, rng, 100000);
    EXPECT_TRUE(c.passes()) << c.relative_error;
}

TEST(Estimation, PerfectEstimation) {
    EstimationStats s;
    s.est_cov = CMatrix::Identity(3, 3);
    s.err_cov = CMatrix::Zero(3, 3);
    Rng rng(1);
    const auto d = draw_estimate_pair(s, rng);
    EXPECT_EQ(d.channel, d.estimate);
}

TEST(Estimation, EstimateErrorMoments) {
    const CMatrix r = local_scattering_R(1.0, 0.2, 0.3, 3);
    EstimationParams p;
    p.ue_power = 1.0;
    p.pilot_length = 2;
    p.noise_power = 0.5;
    p.mode = EstimatorNormalization::StandardMMSE;
    const auto s = estimation_stats(r, p);
    Rng rng(6);
    const int n = 100000;
    CMatrix cross = CMatrix::Zero(3, 3), cov = CMatrix::Zero(3, 3);
    for (int i = 0; i < n; ++i) {
        const auto d = draw_estimate_pair(s, rng);
        cross += d.estimate * (d.channel - d.estimate).adjoint();
        cov += d.channel * d.channel.adjoint();
    }
    cross /= n;
    cov /= n;
    EXPECT_LT(cross.cwiseAbs().maxCoeff(), 5.0 / std::sqrt(n));
    EXPECT_LT((cov - r).cwiseAbs().maxCoeff(), 6.0 / std::sqrt(n));
}

TEST(Stacking, BlockDiagonal) {
    const auto p = params(EstimatorNormalization::StandardMMSE);
    std::vector<CMatrix> corr = {local_scattering_R(1e-10, 0.1, 0.2, 32)};
    for (int l = 0; l < 24; ++l) corr.push_back(local_scattering_R(1e-11 * (l + 1), 0.05 * l, 0.2, 4));
    std::vector<EstimationStats> stats;
    for (const auto& r : corr) stats.push_back(estimation_stats(r, p));
    const auto link = stack_link(corr, stats);
    EXPECT_EQ(link.corr.rows(), 128);
    EXPECT_EQ(link.corr.block(0, 32, 32, 96).norm(), 0.0);
    EXPECT_EQ(link.est_cov.block(36, 0, 4, 36).norm(), 0.0);
    EXPECT_EQ(link.corr.block(32, 32, 4, 4), corr[1]);

    const auto single = stack_link({corr[0]}, {stats[0]});
    EXPECT_EQ(single.corr, corr[0]);
    EXPECT_EQ(single.est_cov, stats[0].est_cov);
    EXPECT_THROW(stack_link({corr[0]}, {}), std::domain_error);
}
