#pragma once

#include <cmath>
#include <stdexcept>

#include "config.hpp"
#include "geometry.hpp"
#include "linalg.hpp"
#include "rng.hpp"

namespace hetmimo {

/// Three-slope COST-Hata loss in dB. `d` in meters; the model itself works in
/// kilometers.
inline double path_loss_db(double d, const PathLossParams& p = {}) {
    if (!(d > 0.0)) throw std::domain_error("path_loss_db: distance must be positive");
    const double km = d / 1000.0, d0 = p.d0 / 1000.0, d1 = p.d1 / 1000.0;
    if (d > p.d1) return p.ref_db + 35.0 * std::log10(km);
    if (d > p.d0) return p.ref_db + 15.0 * std::log10(d1) + 20.0 * std::log10(km);
    return p.ref_db + 15.0 * std::log10(d1) + 20.0 * std::log10(d0);
}

struct LargeScale {
    double beta = 0.0;
    double pathloss_db = 0.0;
    double shadow_db = 0.0;
    double nominal_angle = 0.0;  // radians, relative to the array broadside
};

/// Large-scale gain between a node array (position `node`, broadside azimuth
/// `orientation`) and a user. Distances below `min_distance` are clamped.
inline LargeScale large_scale(Point node, double orientation, Point user, const ScenarioConfig& cfg, Rng& rng) {
    LargeScale ls;
    const double d = std::max(distance(node, user), cfg.min_distance);
    ls.pathloss_db = path_loss_db(d, cfg.pathloss);
    ls.shadow_db = cfg.shadowing_std > 0.0 ? draw_normal(rng, 0.0, cfg.shadowing_std) : 0.0;
    ls.beta = std::pow(10.0, (-ls.pathloss_db + ls.shadow_db) / 10.0);
    ls.nominal_angle = std::atan2(user.y - node.y, user.x - node.x) - orientation;
    return ls;
}

/// First column r(0..N-1) of the Gaussian local-scattering correlation of a
/// half-wavelength ULA, so that R(m,n) = r(m-n).
///
/// Exact: r(d) = beta·E[exp(jπd·sin(φ̄+δ))], δ ~ N(0, σ²), by trapezoid
/// quadrature over ±7σ with weights normalized so r(0) = beta.
/// ClosedForm: the small-angle approximation
/// r(d) = beta·exp(jπd·sin φ̄)·exp(-σ²/2·(πd·cos φ̄)²).
inline CVector scattering_generator(double beta, double angle, double asd, Index n,
                                    ScatteringModel model = ScatteringModel::Exact) {
    if (n <= 0) throw std::domain_error("scattering_generator: antenna count must be positive");
    CVector r(n);
    if (model == ScatteringModel::ClosedForm || asd <= 0.0) {
        const double s = std::sin(angle), c = std::cos(angle);
        for (Index d = 0; d < n; ++d) {
            const double x = kPi * static_cast<double>(d);
            r(d) = beta * std::polar(std::exp(-0.5 * asd * asd * (x * c) * (x * c)), x * s);
        }
        return r;
    }
    // The integrand's spectrum in δ is confined to about π(N-1) plus the
    // Gaussian's own bandwidth, so this step keeps the aliasing error far below
    // double precision.
    const double span = 7.0 * asd;
    const double hmax = 2.0 * kPi / (kPi * static_cast<double>(n - 1) + 10.0 / asd + 10.0);
    const int steps = std::max(64, static_cast<int>(std::ceil(2.0 * span / hmax)));
    const double h = 2.0 * span / steps;
    const Index q = steps + 1;
    Eigen::ArrayXd w(q), cr(q), ci(q);
    for (Index i = 0; i < q; ++i) {
        const double delta = -span + static_cast<double>(i) * h;
        w(i) = std::exp(-0.5 * (delta / asd) * (delta / asd));
        const double phase = kPi * std::sin(angle + delta);
        cr(i) = std::cos(phase);
        ci(i) = std::sin(phase);
    }
    w(0) *= 0.5;
    w(q - 1) *= 0.5;
    w *= beta / w.sum();
    // powers z^d at every quadrature point, advanced in split real/imaginary form
    Eigen::ArrayXd zr = w, zi = Eigen::ArrayXd::Zero(q);
    for (Index d = 0; d < n; ++d) {
        r(d) = cdouble(zr.sum(), zi.sum());
        const Eigen::ArrayXd tr = zr * cr - zi * ci;
        zi = zr * ci + zi * cr;
        zr = tr;
    }
    return r;
}

/// Dense N×N correlation matrix of one (user, node) pair.
inline CMatrix local_scattering_R(double beta, double angle, double asd, Index n,
                                  ScatteringModel model = ScatteringModel::Exact) {
    if (n <= 0) throw std::domain_error("local_scattering_R: antenna count must be positive");
    return toeplitz_from_generator(scattering_generator(beta, angle, asd, n, model));
}

/// Correlated Rayleigh draw h = R^{1/2}·w with w ~ CN(0, I).
inline CVector draw_channel(const CMatrix& r, Rng& rng) {
    const CMatrix root = hermitian_sqrt(r);
    return root * draw_cn_vector(r.rows(), rng);
}

}  // namespace hetmimo
