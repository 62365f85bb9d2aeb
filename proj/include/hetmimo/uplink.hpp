#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "linalg.hpp"
#include "rng.hpp"

namespace hetmimo {

/// What one cell's receiver knows: stacked estimates and error covariances of
/// its own users, and only the stacked correlation of users served elsewhere.
struct CellObservation {
    std::vector<int> own_users;       // global indices
    std::vector<CVector> estimates;   // ĥ per own user, dimension M_c
    std::vector<CMatrix> err_cov;     // Θ per own user
    std::vector<int> foreign_users;   // global indices of other-cell users
    std::vector<CMatrix> foreign_corr;// R per foreign user at this cell's antennas

    Index dimension() const { return estimates.empty() ? 0 : estimates.front().size(); }
};

struct UplinkRealization {
    std::vector<CellObservation> cells;
    std::vector<double> eta;  // per global user, in [0, 1]
    double ue_power = 0.1;
    double noise_power = 1e-13;
};

/// Variances of the four interference terms of MRC detection for one user,
/// normalized by p_u: own estimation error, intra-cell users, other cells and
/// noise. Also carries the desired-signal power.
struct UlInterferenceTerms {
    double signal = 0.0;
    double own_error = 0.0;
    double intra_cell = 0.0;
    double inter_cell = 0.0;
    double noise = 0.0;

    double interference() const { return own_error + intra_cell + inter_cell + noise; }
};

inline UlInterferenceTerms ul_interference_terms(const UplinkRealization& r, int cell, int local_user) {
    const CellObservation& obs = r.cells.at(cell);
    const CVector& h = obs.estimates.at(local_user);
    const int k = obs.own_users.at(local_user);
    auto quad = [&](const CMatrix& m) { return h.dot(m * h).real(); };  // h^H M h
    UlInterferenceTerms t;
    const double norm2 = h.squaredNorm();
    t.signal = r.eta.at(k) * norm2 * norm2;
    t.own_error = r.eta[k] * quad(obs.err_cov[local_user]);
    for (std::size_t j = 0; j < obs.own_users.size(); ++j) {
        if (static_cast<int>(j) == local_user) continue;
        const double eta = r.eta[obs.own_users[j]];
        t.intra_cell += eta * (std::norm(h.dot(obs.estimates[j])) + quad(obs.err_cov[j]));
    }
    for (std::size_t j = 0; j < obs.foreign_users.size(); ++j)
        t.inter_cell += r.eta[obs.foreign_users[j]] * quad(obs.foreign_corr[j]);
#ifdef HETMIMO_MUTATE_UL_INTERCELL_SIGN
    t.inter_cell = -t.inter_cell;
#endif
    t.noise = r.noise_power / r.ue_power * norm2;
    return t;
}

/// Instantaneous MRC SINR of own user `local_user` of `cell`.
inline double ul_sinr(const UplinkRealization& r, int cell, int local_user) {
    const UlInterferenceTerms t = ul_interference_terms(r, cell, local_user);
    if (t.signal <= 0.0) return 0.0;
    return t.signal / t.interference();
}

/// Prelog-weighted SE of one realization.
inline double ul_se(double sinr, int pilot_length, int coherence_block) {
    if (sinr < 0.0) throw std::domain_error("ul_se: negative SINR");
    return (1.0 - static_cast<double>(pilot_length) / coherence_block) * std::log2(1.0 + sinr);
}

// ---------------------------------------------------------------------------
// Symbol-level Monte Carlo of the interference decomposition.

struct OracleTerm {
    std::string name;
    double empirical = 0.0;
    double std_error = 0.0;
    double closed_form = 0.0;

    double z_score() const {
        const double diff = std::abs(empirical - closed_form);
        if (std_error > 0.0) return diff / std_error;
        return diff <= 1e-12 * std::max(1.0, std::abs(closed_form)) ? 0.0 : INFINITY;
    }
    bool passes(double sigmas = 5.0) const { return z_score() <= sigmas; }
};

struct OracleReport {
    std::vector<OracleTerm> terms;
    /// Largest |E[X_i conj(X_j)]| over term pairs i≠j, in units of its standard error.
    double max_cross_z = 0.0;

    bool passes(double sigmas = 5.0) const {
        for (const auto& t : terms)
            if (!t.passes(sigmas)) return false;
        return max_cross_z <= sigmas;
    }
};

inline constexpr long kMinOracleTrials = 10000;

namespace detail {

struct RunningMoments {
    double sum = 0.0, sum2 = 0.0;
    long n = 0;
    void add(double x) { sum += x; sum2 += x * x; ++n; }
    double mean() const { return n ? sum / n : 0.0; }
    double std_error() const {
        if (n < 2) return 0.0;
        const double m = mean();
        return std::sqrt(std::max(0.0, (sum2 / n - m * m)) / (n - 1));
    }
};

// Cross moment E[a conj(b)] with a standard error from its real and imaginary parts.
struct CrossMoments {
    RunningMoments re, im;
    void add(cdouble a, cdouble b) {
        const cdouble p = a * std::conj(b);
        re.add(p.real());
        im.add(p.imag());
    }
    double z() const {
        auto zz = [](const RunningMoments& m) {
            const double se = m.std_error();
            return se > 0.0 ? std::abs(m.mean()) / se : (std::abs(m.mean()) < 1e-300 ? 0.0 : INFINITY);
        };
        return std::max(zz(re), zz(im));
    }
};

inline CMatrix psd_root(const CMatrix& m) { return m.size() ? hermitian_sqrt(m) : m; }

}  // namespace detail

/// Simulates the received MRC output of one own user with fixed own-cell
/// estimates: unit-variance symbols, estimation errors drawn from Θ, foreign
/// channels drawn from R and white noise. Compares the empirical variance of
/// each interference term with ul_interference_terms.
inline OracleReport ul_interference_oracle(const UplinkRealization& r, int cell, int local_user, Rng& rng,
                                           long trials) {
    if (trials < kMinOracleTrials) throw std::invalid_argument("ul_interference_oracle: too few trials");
    const CellObservation& obs = r.cells.at(cell);
    const CVector& h = obs.estimates.at(local_user);
    const Index m = h.size();
    std::vector<CMatrix> err_root, foreign_root;
    for (const auto& t : obs.err_cov) err_root.push_back(detail::psd_root(t));
    for (const auto& c : obs.foreign_corr) foreign_root.push_back(detail::psd_root(c));
    const double noise_scale = std::sqrt(r.noise_power / r.ue_power);

    detail::RunningMoments mom[4];
    detail::CrossMoments cross[6];
    for (long t = 0; t < trials; ++t) {
        cdouble term[4] = {0.0, 0.0, 0.0, 0.0};
        for (std::size_t j = 0; j < obs.own_users.size(); ++j) {
            const double amp = std::sqrt(r.eta[obs.own_users[j]]);
            const CVector e = err_root[j] * draw_cn_vector(m, rng);
            const cdouble x = draw_cn(rng);
            if (static_cast<int>(j) == local_user) {
                term[0] += amp * h.dot(e) * x;  // ĥ^H e
            } else {
                term[1] += amp * h.dot(obs.estimates[j] + e) * x;
            }
        }
        for (std::size_t j = 0; j < obs.foreign_users.size(); ++j) {
            const double amp = std::sqrt(r.eta[obs.foreign_users[j]]);
            const CVector g = foreign_root[j] * draw_cn_vector(m, rng);
            term[2] += amp * h.dot(g) * draw_cn(rng);
        }
        term[3] = noise_scale * h.dot(draw_cn_vector(m, rng));
        for (int i = 0; i < 4; ++i) mom[i].add(std::norm(term[i]));
        int p = 0;
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j) cross[p++].add(term[i], term[j]);
    }

    const UlInterferenceTerms cf = ul_interference_terms(r, cell, local_user);
    const double closed[4] = {cf.own_error, cf.intra_cell, cf.inter_cell, cf.noise};
    const char* names[4] = {"I1_own_error", "I2_intra_cell", "I3_inter_cell", "I4_noise"};
    OracleReport rep;
    for (int i = 0; i < 4; ++i) rep.terms.push_back({names[i], mom[i].mean(), mom[i].std_error(), closed[i]});
    for (const auto& c : cross) rep.max_cross_z = std::max(rep.max_cross_z, c.z());
    return rep;
}

}  // namespace hetmimo
