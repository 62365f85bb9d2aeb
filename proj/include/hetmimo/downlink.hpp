#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "linalg.hpp"
#include "rng.hpp"
#include "uplink.hpp"

namespace hetmimo {

/// Statistics of one transmitting node (cBS, eAP or AP). `corr` holds R of
/// every user at this node; `est_cov` holds Φ for the users its cell serves
/// (empty matrices elsewhere). `eta` is the per-user power coefficient, so the
/// conjugate-beamforming precoder of user j is √eta[j]·ĥ_j.
struct DlNodeStats {
    int cell = 0;
    std::vector<CMatrix> corr;
    std::vector<CMatrix> est_cov;
    std::vector<double> eta;
};

struct DownlinkStatistics {
    std::vector<int> user_cell;
    std::vector<DlNodeStats> nodes;
    double dl_power = 0.2;
    double noise_power = 1e-13;

    std::size_t users() const { return user_cell.size(); }
};

/// Per-user decomposition of the statistical SINR: desired mean (coherent
/// beamforming gain), beamforming uncertainty, intra-cell and inter-cell
/// interference, noise.
struct DlTerms {
    double signal_mean = 0.0;
    double self = 0.0;
    double intra_cell = 0.0;
    double inter_cell = 0.0;
    double noise = 0.0;

    double signal() const { return signal_mean * signal_mean; }
    double interference() const { return self + intra_cell + inter_cell + noise; }
};

inline DlTerms dl_terms(const DownlinkStatistics& s, int k) {
    DlTerms t;
    const int ck = s.user_cell.at(k);
    for (const auto& node : s.nodes) {
        for (std::size_t j = 0; j < s.users(); ++j) {
            if (s.user_cell[j] != node.cell || node.eta[j] <= 0.0) continue;
            const double v = node.eta[j] * trace_product(node.corr[k], node.est_cov[j]);
            if (static_cast<int>(j) == k) {
                t.signal_mean += std::sqrt(node.eta[j]) * node.est_cov[j].trace().real();
                t.self += v;
            } else if (s.user_cell[j] == ck) {
                t.intra_cell += v;
            } else {
                t.inter_cell += v;
            }
        }
    }
    t.noise = s.noise_power / s.dl_power;
    return t;
}

inline double dl_sinr(const DownlinkStatistics& s, int k) {
    const DlTerms t = dl_terms(s, k);
    if (t.signal_mean <= 0.0) return 0.0;
    return t.signal() / t.interference();
}

inline double dl_se(double sinr, double prelog = 1.0) {
    if (sinr < 0.0) throw std::domain_error("dl_se: negative SINR");
    return prelog * std::log2(1.0 + sinr);
}

/// Symbol-level Monte Carlo of the received downlink signal of user k:
/// estimates ĥ ~ CN(0, Φ) and errors ~ CN(0, Θ) at serving nodes, channels
/// ~ CN(0, R) elsewhere, unit-variance data symbols. Reports the mean of the
/// effective desired gain and the second moments of the three interference
/// terms against dl_terms.
inline OracleReport dl_term_oracle(const DownlinkStatistics& s, int k, Rng& rng, long trials) {
    if (trials < kMinOracleTrials) throw std::invalid_argument("dl_term_oracle: too few trials");
    const std::size_t nu = s.users();
    struct Roots {
        std::vector<CMatrix> phi, theta, corr;
    };
    std::vector<Roots> roots(s.nodes.size());
    for (std::size_t n = 0; n < s.nodes.size(); ++n) {
        const auto& node = s.nodes[n];
        roots[n].phi.resize(nu);
        roots[n].theta.resize(nu);
        roots[n].corr.resize(nu);
        roots[n].corr[k] = detail::psd_root(node.corr[k]);
        for (std::size_t j = 0; j < nu; ++j) {
            if (s.user_cell[j] != node.cell) continue;
            roots[n].phi[j] = detail::psd_root(node.est_cov[j]);
            if (static_cast<int>(j) == k) roots[n].theta[j] = detail::psd_root(node.corr[j] - node.est_cov[j]);
        }
    }
    const DlTerms cf = dl_terms(s, k);
    const int ck = s.user_cell.at(k);

    detail::RunningMoments gain_re, gain_im, mom[3];
    detail::CrossMoments cross[3];
    for (long t = 0; t < trials; ++t) {
        cdouble gain = 0.0, j2 = 0.0, j3 = 0.0;
        std::vector<cdouble> sym(nu);
        for (auto& x : sym) x = draw_cn(rng);
        for (std::size_t n = 0; n < s.nodes.size(); ++n) {
            const auto& node = s.nodes[n];
            const Index dim = node.corr[k].rows();
            CVector hk, hhat_k;
            const bool serves_k = node.cell == ck;
            if (serves_k) {
                hhat_k = roots[n].phi[k] * draw_cn_vector(dim, rng);
                hk = hhat_k + roots[n].theta[k] * draw_cn_vector(dim, rng);
            } else {
                hk = roots[n].corr[k] * draw_cn_vector(dim, rng);
            }
            for (std::size_t j = 0; j < nu; ++j) {
                if (s.user_cell[j] != node.cell || node.eta[j] <= 0.0) continue;
                const double amp = std::sqrt(node.eta[j]);
                if (static_cast<int>(j) == k) {
                    gain += amp * hk.dot(hhat_k);
                    continue;
                }
                const CVector hhat_j = roots[n].phi[j] * draw_cn_vector(dim, rng);
                const cdouble v = amp * hk.dot(hhat_j) * sym[j];
                if (s.user_cell[j] == ck) j2 += v; else j3 += v;
            }
        }
        gain_re.add(gain.real());
        gain_im.add(gain.imag());
        const cdouble j1 = (gain - cf.signal_mean) * sym[k];
        mom[0].add(std::norm(j1));
        mom[1].add(std::norm(j2));
        mom[2].add(std::norm(j3));
        cross[0].add(j1, j2);
        cross[1].add(j1, j3);
        cross[2].add(j2, j3);
    }

    OracleReport rep;
    rep.terms.push_back({"desired_mean", gain_re.mean(), gain_re.std_error(), cf.signal_mean});
    rep.terms.push_back({"desired_mean_imag", gain_im.mean(), gain_im.std_error(), 0.0});
    rep.terms.push_back({"J1_beamforming_uncertainty", mom[0].mean(), mom[0].std_error(), cf.self});
    rep.terms.push_back({"J2_intra_cell", mom[1].mean(), mom[1].std_error(), cf.intra_cell});
    rep.terms.push_back({"J3_inter_cell", mom[2].mean(), mom[2].std_error(), cf.inter_cell});
    for (const auto& c : cross) rep.max_cross_z = std::max(rep.max_cross_z, c.z());
    return rep;
}

}  // namespace hetmimo
