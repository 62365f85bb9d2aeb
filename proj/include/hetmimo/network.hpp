#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "config.hpp"
#include "downlink.hpp"
#include "estimation.hpp"
#include "geometry.hpp"
#include "linalg.hpp"
#include "power_control.hpp"
#include "propagation.hpp"
#include "rng.hpp"
#include "uplink.hpp"

namespace hetmimo {

/// A transmitting/receiving array: cBS, eAP or cell-free AP.
struct Node {
    int cell = 0;
    Index antennas = 0;
    Point pos;
    double orientation = 0.0;
    bool is_cbs = false;
};

/// Everything one epoch needs after the large-scale draw. Correlations are
/// kept as Toeplitz generators; users are served by the nodes of their cell,
/// and those links also carry their spectral estimation statistics.
struct EpochModel {
    ScenarioConfig cfg;
    NetworkLayout layout;
    std::vector<Node> nodes;
    std::vector<int> user_cell;
    std::vector<std::vector<int>> cell_nodes;  // global node indices, cBS first
    std::vector<std::vector<int>> cell_users;
    std::vector<std::vector<CVector>> corr;          // [user][node] generator of R
    std::vector<std::vector<SpectralStats>> serving; // [user][position in cell_nodes]

    // Uplink helpers per [cell][p]: the cell users' W^T stacked vertically with
    // their θ alongside, and the lag-weighted generators of every other-cell
    // user (rows follow foreign_users[cell]).
    std::vector<std::vector<RMatrix>> ul_basis_t;
    std::vector<std::vector<RVector>> ul_theta;
    std::vector<std::vector<int>> foreign_users;
    std::vector<std::vector<CMatrix>> foreign_gen;

    int users() const { return static_cast<int>(user_cell.size()); }
    int cells() const { return static_cast<int>(cell_nodes.size()); }
    const std::vector<int>& serving_nodes(int k) const { return cell_nodes[user_cell[k]]; }
};

inline std::vector<Node> build_nodes(const ScenarioConfig& cfg, const NetworkLayout& layout,
                                     std::vector<std::vector<int>>& cell_nodes) {
    std::vector<Node> nodes;
    const int cells = cfg.paradigm == Paradigm::CellFree ? 1 : cfg.num_cells;
    cell_nodes.assign(cells, {});
    for (int c = 0; c < cells; ++c) {
        if (cfg.has_cbs() && c < static_cast<int>(layout.cbs.size())) {
            const auto& b = layout.cbs[c];
            cell_nodes[c].push_back(static_cast<int>(nodes.size()));
            nodes.push_back({c, cfg.cbs_antennas, b.pos, b.orientation, true});
        }
        for (const auto& e : layout.eaps) {
            if (e.cell != c) continue;
            cell_nodes[c].push_back(static_cast<int>(nodes.size()));
            nodes.push_back({c, cfg.eap_antennas, e.pos, e.orientation, false});
        }
    }
    return nodes;
}

inline void prepare_uplink(EpochModel& m) {
    const int C = m.cells();
    m.ul_basis_t.assign(C, {});
    m.ul_theta.assign(C, {});
    m.foreign_users.assign(C, {});
    m.foreign_gen.assign(C, {});
    for (int c = 0; c < C; ++c) {
        const auto& users = m.cell_users[c];
        for (int j = 0; j < m.users(); ++j)
            if (m.user_cell[j] != c) m.foreign_users[c].push_back(j);
        const Index kf = static_cast<Index>(m.foreign_users[c].size());
        for (std::size_t p = 0; p < m.cell_nodes[c].size(); ++p) {
            const int node = m.cell_nodes[c][p];
            const Index n = m.nodes[node].antennas;
            RMatrix bt(n * static_cast<Index>(users.size()), n);
            RVector th(n * static_cast<Index>(users.size()));
            for (std::size_t i = 0; i < users.size(); ++i) {
                const SpectralStats& st = m.serving[users[i]][p];
                bt.middleRows(static_cast<Index>(i) * n, n) = st.spectrum.basis.transpose();
                th.segment(static_cast<Index>(i) * n, n) = st.theta;
            }
            m.ul_basis_t[c].push_back(std::move(bt));
            m.ul_theta[c].push_back(std::move(th));
            CMatrix g(kf, n);
            for (Index f = 0; f < kf; ++f) {
                g.row(f) = 2.0 * m.corr[m.foreign_users[c][f]][node].transpose();
                g(f, 0) = m.corr[m.foreign_users[c][f]][node](0).real();
            }
            m.foreign_gen[c].push_back(std::move(g));
        }
    }
}

/// Layout, large-scale fading and serving-link statistics of one epoch.
inline EpochModel build_epoch(const ScenarioConfig& cfg, std::uint64_t epoch) {
    EpochModel m;
    m.cfg = cfg;
    Rng layout_rng = substream(cfg.seed, epoch, StreamTag::Layout);
    m.layout = generate_layout(cfg, layout_rng);
    m.nodes = build_nodes(cfg, m.layout, m.cell_nodes);
    m.cell_users.assign(m.cell_nodes.size(), {});
    for (const auto& u : m.layout.users) {
        m.cell_users[u.cell].push_back(static_cast<int>(m.user_cell.size()));
        m.user_cell.push_back(u.cell);
    }

    Rng ls_rng = substream(cfg.seed, epoch, StreamTag::LargeScale);
    const int k_total = m.users();
    m.corr.assign(k_total, {});
    for (int k = 0; k < k_total; ++k) {
        m.corr[k].reserve(m.nodes.size());
        for (const auto& n : m.nodes) {
            const LargeScale ls = large_scale(n.pos, n.orientation, m.layout.users[k].pos, cfg, ls_rng);
            m.corr[k].push_back(scattering_generator(ls.beta, ls.nominal_angle, cfg.asd, n.antennas, cfg.scattering));
        }
    }

    const EstimationParams ep = estimation_params(cfg);
    m.serving.assign(k_total, {});
    for (int k = 0; k < k_total; ++k)
        for (int n : m.serving_nodes(k)) m.serving[k].push_back(spectral_stats(m.corr[k][n], ep));
    prepare_uplink(m);
    return m;
}

/// Max-min groups for the configured scope: one group per cell, or a single
/// joint problem.
inline std::vector<std::vector<Index>> maxmin_groups(const EpochModel& m) {
    std::vector<std::vector<Index>> g;
    if (m.cfg.maxmin_scope == MaxMinScope::Network) return g;
    for (const auto& users : m.cell_users) g.emplace_back(users.begin(), users.end());
    return g;
}

// ---------------------------------------------------------------------------
// Downlink

/// Link model of the epoch: links ordered by node, then by user, matching the
/// dense reference. cross(k, l) = tr(R_k Φ_l) is read off Toeplitz lag sums.
inline DlLinkModel dl_link_model(const EpochModel& m) {
    const int K = m.users();
    DlLinkModel d;
    d.users = K;
    d.nodes = static_cast<Index>(m.nodes.size());
    d.noise = m.cfg.noise_power / m.cfg.dl_power;
    std::vector<double> tr;
    std::vector<RVector> cols;
    for (Index n = 0; n < d.nodes; ++n) {
        const int c = m.nodes[n].cell;
        const auto& nodes = m.cell_nodes[c];
        const std::size_t p = static_cast<std::size_t>(std::find(nodes.begin(), nodes.end(), n) - nodes.begin());
        const auto& users = m.cell_users[c];
        if (users.empty()) continue;
        const Index N = m.nodes[n].antennas;
        CMatrix lags(N, static_cast<Index>(users.size()));
        for (std::size_t i = 0; i < users.size(); ++i) {
            const SpectralStats& s = m.serving[users[i]][p];
            d.user.push_back(users[i]);
            d.node.push_back(n);
            tr.push_back(s.trace_phi());
            lags.col(static_cast<Index>(i)) = centro_lag_sums(s.reduced_phi());
        }
        CMatrix gen(K, N);
        for (int k = 0; k < K; ++k) {
            gen.row(k) = 2.0 * m.corr[k][n].transpose();
            gen(k, 0) = m.corr[k][n](0).real();
        }
        const RMatrix cr = (gen * lags).real();
        for (Index i = 0; i < cr.cols(); ++i) cols.push_back(cr.col(i));
    }
    d.trace = Eigen::Map<const RVector>(tr.data(), static_cast<Index>(tr.size()));
    d.cross.resize(K, d.links());
    for (Index l = 0; l < d.links(); ++l) d.cross.col(l) = cols[l];
    return d;
}

/// Max-min under the configured solver and scope.
inline DlMaxMinResult dl_maxmin(const EpochModel& m, const DlLinkModel& d) {
    return maxmin_dl_links(d, m.cfg.dl_maxmin_solver, m.cfg.dl_maxmin_base, maxmin_groups(m));
}

/// Dense reference statistics of the same epoch (explicit R and Φ matrices)
/// with per-link coefficients in dl_link_model order.
inline DownlinkStatistics reference_downlink(const EpochModel& m, const RVector& eta) {
    DownlinkStatistics st;
    st.user_cell = m.user_cell;
    st.dl_power = m.cfg.dl_power;
    st.noise_power = m.cfg.noise_power;
    const EstimationParams ep = estimation_params(m.cfg);
    const int K = m.users();
    Index l = 0;
    for (int c = 0; c < m.cells(); ++c) {
        for (int n : m.cell_nodes[c]) {
            DlNodeStats node;
            node.cell = c;
            node.eta.assign(K, 0.0);
            node.est_cov.resize(K);
            for (int k = 0; k < K; ++k) node.corr.push_back(toeplitz_from_generator(m.corr[k][n]));
            for (int k : m.cell_users[c]) {
                node.est_cov[k] = estimation_stats(node.corr[k], ep).est_cov;
                node.eta[k] = eta(l++);
            }
            st.nodes.push_back(std::move(node));
        }
    }
    return st;
}

// ---------------------------------------------------------------------------
// Uplink

/// One small-scale draw of every serving-link estimate, in natural and
/// reduced (Q^H-rotated) coordinates.
struct UlDraw {
    std::vector<std::vector<CVector>> estimate; // [user][p]
    std::vector<std::vector<CVector>> reduced;  // [user][p]
};

inline UlDraw draw_uplink(const EpochModel& m, Rng& rng) {
    UlDraw d;
    d.estimate.assign(m.users(), {});
    d.reduced.assign(m.users(), {});
    for (int k = 0; k < m.users(); ++k)
        for (const auto& s : m.serving[k]) {
            CVector y;
            d.estimate[k].push_back(draw_estimate(s, rng, &y));
            d.reduced[k].push_back(std::move(y));
        }
    return d;
}

/// UL SINR system of one draw (η as the variable, bounded by 1).
inline SinrSystem ul_system_fast(const EpochModel& m, const UlDraw& d) {
    const int K = m.users();
    SinrSystem s;
    s.a = RVector::Zero(K);
    s.c = RVector::Zero(K);
    s.B = RMatrix::Zero(K, K);
    s.upper = RVector::Ones(K);
    const double nr = m.cfg.noise_power / m.cfg.ue_power;
    for (int c = 0; c < m.cells(); ++c) {
        const auto& users = m.cell_users[c];
        const auto& foreign = m.foreign_users[c];
        const Index kc = static_cast<Index>(users.size());
        if (kc == 0) continue;
        for (int k : users) {
            double n2 = 0.0;
            for (const auto& y : d.reduced[k]) n2 += y.squaredNorm();
            s.a(k) = n2 * n2;
            s.c(k) = nr * n2;
        }
        CMatrix gram = CMatrix::Zero(kc, kc);
        RMatrix own = RMatrix::Zero(kc, kc);  // own(k, j) = ĥ_k^H Θ_j ĥ_k
        RMatrix other = RMatrix::Zero(kc, static_cast<Index>(foreign.size()));
        for (std::size_t p = 0; p < m.cell_nodes[c].size(); ++p) {
            const Index n = m.nodes[m.cell_nodes[c][p]].antennas;
            CMatrix Y(n, kc);
            for (Index i = 0; i < kc; ++i) Y.col(i) = d.reduced[users[i]][p];
            gram.noalias() += Y.adjoint() * Y;
            RMatrix split(n, 2 * kc);
            split.leftCols(kc) = Y.real();
            split.rightCols(kc) = Y.imag();
            // rows j·n..j·n+n-1 of z hold W_j^T y, so ĥ_k^H Θ_j ĥ_k = Σ_i θ_i z_i²
            RMatrix z = m.ul_basis_t[c][p] * split;
            z.array() = z.array().square().colwise() * m.ul_theta[c][p].array();
            for (Index jj = 0; jj < kc; ++jj) {
                const RVector col = z.middleRows(jj * n, n).colwise().sum().transpose();
                own.col(jj) += col.head(kc) + col.tail(kc);
            }
            if (!foreign.empty()) {
                CMatrix lp(n, kc);
                for (Index i = 0; i < kc; ++i) lp.col(i) = lag_products(d.estimate[users[i]][p]);
                other.noalias() += (m.foreign_gen[c][p] * lp).real().transpose();
            }
        }
        for (Index kk = 0; kk < kc; ++kk) {
            for (Index jj = 0; jj < kc; ++jj) {
                s.B(users[kk], users[jj]) = own(kk, jj);
                if (kk != jj) s.B(users[kk], users[jj]) += std::norm(gram(kk, jj));
            }
            for (std::size_t f = 0; f < foreign.size(); ++f) s.B(users[kk], foreign[f]) = other(kk, static_cast<Index>(f));
        }
    }
    return s;
}

/// Dense reference realization of the same draw, as each cell's receiver sees it.
inline UplinkRealization reference_uplink(const EpochModel& m, const UlDraw& d, const std::vector<double>& eta) {
    UplinkRealization r;
    r.eta = eta;
    r.ue_power = m.cfg.ue_power;
    r.noise_power = m.cfg.noise_power;
    const EstimationParams ep = estimation_params(m.cfg);
    for (int c = 0; c < m.cells(); ++c) {
        CellObservation obs;
        const auto& nodes = m.cell_nodes[c];
        for (int k : m.cell_users[c]) {
            std::vector<CMatrix> theta;
            for (int n : nodes) theta.push_back(estimation_stats(toeplitz_from_generator(m.corr[k][n]), ep).err_cov);
            obs.own_users.push_back(k);
            obs.estimates.push_back(stack(d.estimate[k]));
            obs.err_cov.push_back(block_diagonal(theta));
        }
        for (int j = 0; j < m.users(); ++j) {
            if (m.user_cell[j] == c) continue;
            std::vector<CMatrix> blocks;
            for (int n : nodes) blocks.push_back(toeplitz_from_generator(m.corr[j][n]));
            obs.foreign_users.push_back(j);
            obs.foreign_corr.push_back(block_diagonal(blocks));
        }
        r.cells.push_back(std::move(obs));
    }
    return r;
}

}  // namespace hetmimo
