#pragma once

#include <stdexcept>
#include <vector>

#include "config.hpp"
#include "linalg.hpp"
#include "rng.hpp"

namespace hetmimo {

inline constexpr double kConditionLimit = 1e12;
inline constexpr double kTikhonov = 1e-12;

/// MMSE statistics of one (user, node) link. `est_cov` is the covariance of
/// the channel estimate and `err_cov` that of the estimation error.
struct EstimationStats {
    CMatrix gamma;
    CMatrix est_cov;
    CMatrix err_cov;
};

struct EstimationParams {
    double ue_power = 0.1;
    int pilot_length = 8;
    double noise_power = 1e-13;
    EstimatorNormalization mode = EstimatorNormalization::PaperVerbatim;
};

inline EstimationParams estimation_params(const ScenarioConfig& cfg) {
    return {cfg.ue_power, cfg.pilot_length, cfg.noise_power, cfg.estimator_normalization};
}

/// Dense computation from R:
///   PaperVerbatim:  Γ = τ_p(p_u τ_p R + σ²I),  Φ = p_u R Γ⁻¹ R
///   StandardMMSE:   Γ = p_u τ_p R + σ²I,       Φ = p_u τ_p R Γ⁻¹ R
/// and Θ = R − Φ in both modes.
inline EstimationStats estimation_stats(const CMatrix& r, const EstimationParams& p) {
    if (r.rows() != r.cols()) throw std::domain_error("estimation_stats: R must be square");
    const Index n = r.rows();
    const double tp = p.pilot_length;
    const CMatrix id = CMatrix::Identity(n, n);
    EstimationStats s;
    double scale = 0.0;
    if (p.mode == EstimatorNormalization::PaperVerbatim) {
        s.gamma = tp * (p.ue_power * tp * r + p.noise_power * id);
        scale = p.ue_power;
    } else {
        s.gamma = p.ue_power * tp * r + p.noise_power * id;
        scale = p.ue_power * tp;
    }
    CMatrix g = s.gamma;
    {
        Eigen::SelfAdjointEigenSolver<CMatrix> es(g, Eigen::EigenvaluesOnly);
        const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
        if (!(lo > 0.0) || hi / lo > kConditionLimit) g += kTikhonov * g.trace().real() / n * id;
    }
    const CMatrix x = g.ldlt().solve(r);
    CMatrix phi = scale * r * x;
    phi = 0.5 * (phi + phi.adjoint()).eval();
    s.est_cov = phi;
    s.err_cov = r - phi;
    return s;
}

/// Eigenvalue form of the same statistics for a Hermitian Toeplitz R:
/// R = (Q·W) diag(λ) (Q·W)^H and Φ, Θ share that basis with eigenvalues φ, θ.
struct SpectralStats {
    CentroSpectrum spectrum;
    RVector phi;
    RVector theta;

    double trace_phi() const { return phi.sum(); }
    /// Real form Q^H·Φ·Q = W diag(φ) W^T.
    RMatrix reduced_phi() const {
        const RMatrix v = spectrum.basis * phi.cwiseSqrt().asDiagonal();
        RMatrix out = RMatrix::Zero(v.rows(), v.rows());
        out.selfadjointView<Eigen::Lower>().rankUpdate(v);
        return out.selfadjointView<Eigen::Lower>();
    }
};

inline void spectral_map(const RVector& lambda, const EstimationParams& p, RVector& phi, RVector& theta) {
    const Index n = lambda.size();
    const double tp = p.pilot_length;
    RVector lam = lambda.cwiseMax(0.0);
    RVector g(n);
    for (Index i = 0; i < n; ++i) {
        g(i) = p.ue_power * tp * lam(i) + p.noise_power;
        if (p.mode == EstimatorNormalization::PaperVerbatim) g(i) *= tp;
    }
    const double lo = g.minCoeff(), hi = g.maxCoeff();
    if (!(lo > 0.0) || hi / lo > kConditionLimit) g.array() += kTikhonov * g.mean();
    const double scale = p.mode == EstimatorNormalization::PaperVerbatim ? p.ue_power : p.ue_power * tp;
    phi.resize(n);
    theta.resize(n);
    for (Index i = 0; i < n; ++i) {
        phi(i) = scale * lam(i) * lam(i) / g(i);
        theta(i) = std::max(0.0, lambda(i) - phi(i));
    }
}

/// Spectral statistics of the Toeplitz correlation with generator `r`.
inline SpectralStats spectral_stats(const CVector& r, const EstimationParams& p) {
    SpectralStats s;
    s.spectrum = centro_spectrum_toeplitz(r);
    spectral_map(s.spectrum.values, p, s.phi, s.theta);
    return s;
}

/// Independent draws ĥ ~ CN(0, Φ) and h = ĥ + e with e ~ CN(0, Θ).
struct EstimatePair {
    CVector estimate;
    CVector channel;
};

inline EstimatePair draw_estimate_pair(const EstimationStats& s, Rng& rng) {
    EstimatePair out;
    out.estimate = hermitian_sqrt(s.est_cov) * draw_cn_vector(s.est_cov.rows(), rng);
    const CVector err = hermitian_sqrt(s.err_cov) * draw_cn_vector(s.err_cov.rows(), rng);
    out.channel = out.estimate + err;
    return out;
}

/// Estimate draw from spectral statistics: ĥ = Q·W·(√φ ∘ z). Returns the
/// reduced coordinates y = W·(√φ ∘ z) through `reduced` when non-null.
inline CVector draw_estimate(const SpectralStats& s, Rng& rng, CVector* reduced = nullptr) {
    const Index n = s.phi.size();
    CVector z = draw_cn_vector(n, rng);
    for (Index i = 0; i < n; ++i) z(i) *= std::sqrt(s.phi(i));
    CVector y = s.spectrum.basis * z;
    CVector h = centro_apply_q(y);
    if (reduced) *reduced = std::move(y);
    return h;
}

// ---------------------------------------------------------------------------
// Stacking over the nodes of one cell (cBS first, then eAPs by index).

struct StackedLink {
    CMatrix corr;      // block-diagonal R
    CMatrix err_cov;   // block-diagonal Θ
    CMatrix est_cov;   // block-diagonal Φ
    CVector estimate;  // stacked ĥ, empty unless realized
};

struct StackedCellStats {
    int cell = 0;
    Index dimension = 0;
    std::vector<StackedLink> users;
};

/// Stacks per-node statistics of one user. `estimates` may be empty; otherwise
/// it must hold one vector per node.
inline StackedLink stack_link(const std::vector<CMatrix>& corr, const std::vector<EstimationStats>& stats,
                              const std::vector<CVector>& estimates = {}) {
    if (corr.size() != stats.size() || (!estimates.empty() && estimates.size() != corr.size()))
        throw std::domain_error("stack_link: mismatched node counts");
    std::vector<CMatrix> theta, phi;
    for (std::size_t l = 0; l < stats.size(); ++l) {
        if (stats[l].err_cov.rows() != corr[l].rows())
            throw std::domain_error("stack_link: mismatched node dimensions");
        theta.push_back(stats[l].err_cov);
        phi.push_back(stats[l].est_cov);
    }
    StackedLink out{block_diagonal(corr), block_diagonal(theta), block_diagonal(phi), {}};
    if (!estimates.empty()) out.estimate = stack(estimates);
    return out;
}

/// Stacks every user of cell `cell`: corr[u][l] and stats[u][l] are the
/// correlation and statistics of user u at node l, with `nodes` nodes per user.
inline StackedCellStats stack_cell(int cell, std::size_t nodes, const std::vector<std::vector<CMatrix>>& corr,
                                   const std::vector<std::vector<EstimationStats>>& stats,
                                   const std::vector<std::vector<CVector>>& estimates = {}) {
    if (corr.size() != stats.size() || (!estimates.empty() && estimates.size() != corr.size()))
        throw std::domain_error("stack_cell: mismatched user counts");
    StackedCellStats out;
    out.cell = cell;
    for (std::size_t u = 0; u < corr.size(); ++u) {
        if (corr[u].size() != nodes) throw std::domain_error("stack_cell: mismatched node counts");
        out.users.push_back(stack_link(corr[u], stats[u], estimates.empty() ? std::vector<CVector>{} : estimates[u]));
        if (u == 0) out.dimension = out.users.back().corr.rows();
        if (out.users.back().corr.rows() != out.dimension) throw std::domain_error("stack_cell: mismatched dimensions");
    }
    return out;
}

}  // namespace hetmimo
