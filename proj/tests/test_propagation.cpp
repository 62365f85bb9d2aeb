#include <gtest/gtest.h>

#include "hetmimo/propagation.hpp"

using namespace hetmimo;

TEST(PathLoss, HandEvaluatedValues) {
    EXPECT_NEAR(path_loss_db(200.0), 116.23605, 1e-4);
    EXPECT_NEAR(path_loss_db(30.0), 90.727, 1e-3);
    EXPECT_NEAR(path_loss_db(5.0), 81.1846, 1e-4);
}

TEST(PathLoss, ContinuityAndSlopes) {
    const PathLossParams p;
    const double eps = 1e-9;
    EXPECT_NEAR(path_loss_db(p.d1 - eps), path_loss_db(p.d1 + eps), 1e-6);
    EXPECT_NEAR(path_loss_db(p.d0 - eps), path_loss_db(p.d0 + eps), 1e-6);
    EXPECT_NEAR(path_loss_db(3000.0) - path_loss_db(300.0), 35.0, 1e-9);
    EXPECT_NEAR(path_loss_db(40.0) - path_loss_db(20.0), 20.0 * std::log10(2.0), 1e-9);
    EXPECT_THROW(path_loss_db(0.0), std::domain_error);
}

TEST(LargeScale, NoShadowing) {
    auto cfg = paradigm_preset(Preset::HeteroQuarter);
    cfg.shadowing_std = 0.0;
    Rng rng(1);
    const auto ls = large_scale({0, 0}, 0.0, {120, 0}, cfg, rng);
    EXPECT_DOUBLE_EQ(ls.beta, std::pow(10.0, -path_loss_db(120.0) / 10.0));
    EXPECT_NEAR(ls.nominal_angle, 0.0, 1e-15);
}

TEST(LargeScale, ShadowingMean) {
    const auto cfg = paradigm_preset(Preset::HeteroQuarter);
    Rng rng(2);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) sum += large_scale({0, 0}, 0.0, {100, 100}, cfg, rng).shadow_db;
    EXPECT_NEAR(sum / n, 0.0, 3.0 * 8.0 / std::sqrt(n));
}

TEST(LargeScale, ClampedDistance) {
    const auto cfg = paradigm_preset(Preset::HeteroQuarter);
    Rng rng(3);
    const auto ls = large_scale({5, 5}, 0.0, {5, 5}, cfg, rng);
    EXPECT_TRUE(std::isfinite(ls.pathloss_db));
    EXPECT_DOUBLE_EQ(ls.pathloss_db, path_loss_db(cfg.min_distance));
}

TEST(Scattering, ScalarCase) {
    const CMatrix r = local_scattering_R(0.3, 0.4, 0.2, 1);
    EXPECT_NEAR(r(0, 0).real(), 0.3, 1e-15);
    EXPECT_NEAR(r(0, 0).imag(), 0.0, 1e-15);
}

TEST(Scattering, ZeroSpreadIsSteeringOuterProduct) {
    const double phi = 0.5;
    const CMatrix r = local_scattering_R(2.0, phi, 1e-9, 6);
    CVector a(6);
    for (Index n = 0; n < 6; ++n) a(n) = std::polar(1.0, kPi * n * std::sin(phi));
    EXPECT_LT((r - 2.0 * a * a.adjoint()).norm(), 1e-6);
}

// Independent midpoint quadrature of β·E[exp(jπ(m-n) sin(φ+δ))] over the
// Gaussian density.
TEST(Scattering, MatchesQuadratureOracle) {
    const double phi = 30.0 * kPi / 180.0, asd = 15.0 * kPi / 180.0, beta = 1.0;
    const CMatrix r = local_scattering_R(beta, phi, asd, 4);
    for (Index m = 0; m < 4; ++m)
        for (Index n = 0; n < 4; ++n) {
            cdouble acc = 0.0;
            double mass = 0.0;
            const int steps = 200000;
            const double lo = -10 * asd, h = 20 * asd / steps;
            for (int i = 0; i < steps; ++i) {
                const double d = lo + (i + 0.5) * h;
                const double w = std::exp(-0.5 * d * d / (asd * asd));
                acc += w * std::polar(1.0, kPi * double(m - n) * std::sin(phi + d));
                mass += w;
            }
            acc *= beta / mass;
            EXPECT_LE(std::abs(r(m, n) - acc), 0.02 * std::max(std::abs(acc), 1e-3)) << m << "," << n;
        }
}

TEST(Scattering, HermitianPsdToeplitz) {
    for (auto model : {ScatteringModel::Exact, ScatteringModel::ClosedForm}) {
        const CMatrix r = local_scattering_R(1e-9, -1.1, 0.26, 64, model);
        EXPECT_TRUE(is_hermitian(r));
        EXPECT_GE(min_eigenvalue(r), -1e-10 * r.trace().real());
        for (Index i = 1; i < 64; ++i) EXPECT_EQ(r(i, i - 1), r(1, 0));
    }
}

TEST(Channel, IdentityCovariance) {
    const CMatrix r = CMatrix::Identity(3, 3);
    Rng rng(7);
    CMatrix acc = CMatrix::Zero(3, 3);
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const CVector h = draw_channel(r, rng);
        acc += h * h.adjoint();
    }
    acc /= n;
    for (Index i = 0; i < 3; ++i)
        for (Index j = 0; j < 3; ++j) EXPECT_NEAR(std::abs(acc(i, j) - r(i, j)), 0.0, 0.05);
}

TEST(Channel, ZeroCovariance) {
    Rng rng(7);
    EXPECT_EQ(draw_channel(CMatrix::Zero(4, 4), rng).norm(), 0.0);
}

TEST(Channel, ZeroMean) {
    const CMatrix r = local_scattering_R(1.0, 0.3, 0.2, 4);
    Rng rng(8);
    CVector mean = CVector::Zero(4);
    const int n = 50000;
    for (int i = 0; i < n; ++i) mean += draw_channel(r, rng);
    mean /= n;
    EXPECT_LT(mean.norm(), 5.0 * std::sqrt(r.trace().real() / n));
}
