#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "downlink.hpp"
#include "estimation.hpp"
#include "power_control.hpp"
#include "propagation.hpp"
#include "rng.hpp"
#include "uplink.hpp"

namespace hetmimo {

// ---------------------------------------------------------------------------
// Toy networks

/// Small multi-cell network given directly by its correlation matrices.
/// Node n belongs to cell node_cell[n]; users are served by every node of
/// their cell.
struct ToyNetwork {
    std::vector<int> user_cell;
    std::vector<int> node_cell;
    std::vector<Index> node_antennas;
    std::vector<std::vector<CMatrix>> corr;  // [user][node]
    EstimationParams params;
    double dl_power = 0.2;

    int users() const { return static_cast<int>(user_cell.size()); }
    int nodes() const { return static_cast<int>(node_cell.size()); }
    int cells() const { return node_cell.empty() ? 0 : *std::max_element(node_cell.begin(), node_cell.end()) + 1; }
};

/// Random PSD matrix A·A^H/n with A of random rank between 1 and n.
inline CMatrix random_psd(Index n, Rng& rng, double scale = 1.0) {
    const Index rank = 1 + static_cast<Index>(draw_uniform(rng, 0.0, static_cast<double>(n) - 1e-9));
    CMatrix a(n, rank);
    for (Index c = 0; c < rank; ++c) a.col(c) = draw_cn_vector(n, rng);
    return scale * a * a.adjoint() / static_cast<double>(n);
}

struct ToyShape {
    int max_cells = 2;
    int max_users = 3;
    int max_nodes_per_cell = 2;
    Index max_antennas = 8;
};

/// Random toy with one to max_cells cells (each with at least one user), local
/// scattering correlations with random gains, angles and spreads, and noise of
/// the order of the received pilot power.
inline ToyNetwork random_toy(Rng& rng, const ToyShape& shape = {}, EstimatorNormalization mode = EstimatorNormalization::StandardMMSE) {
    ToyNetwork t;
    auto pick = [&](int lo, int hi) { return lo + static_cast<int>(draw_uniform(rng, 0.0, hi - lo + 1 - 1e-9)); };
    const int cells = pick(1, shape.max_cells);
    const int users = pick(cells, std::max(cells, shape.max_users));
    for (int k = 0; k < users; ++k) t.user_cell.push_back(k < cells ? k : pick(0, cells - 1));
    for (int c = 0; c < cells; ++c) {
        const int nodes = pick(1, shape.max_nodes_per_cell);
        for (int n = 0; n < nodes; ++n) {
            t.node_cell.push_back(c);
            t.node_antennas.push_back(pick(1, static_cast<int>(shape.max_antennas)));
        }
    }
    t.params.ue_power = 0.1;
    t.params.pilot_length = 4;
    t.params.noise_power = 0.05;
    t.params.mode = mode;
    t.corr.assign(users, {});
    for (int k = 0; k < users; ++k)
        for (int n = 0; n < t.nodes(); ++n) {
            const double beta = std::pow(10.0, draw_uniform(rng, -1.0, 1.0));
            const double angle = draw_uniform(rng, -kPi / 2, kPi / 2);
            const double asd = draw_uniform(rng, 0.05, 0.5);
            t.corr[k].push_back(local_scattering_R(beta, angle, asd, t.node_antennas[n]));
        }
    return t;
}

/// Estimation statistics of every (user, node) pair.
inline std::vector<std::vector<EstimationStats>> toy_stats(const ToyNetwork& t) {
    std::vector<std::vector<EstimationStats>> s(t.users());
    for (int k = 0; k < t.users(); ++k)
        for (int n = 0; n < t.nodes(); ++n) s[k].push_back(estimation_stats(t.corr[k][n], t.params));
    return s;
}

/// One realization of the uplink with fresh own-cell estimates.
inline UplinkRealization toy_uplink(const ToyNetwork& t, Rng& rng, const std::vector<double>& eta = {}) {
    const auto stats = toy_stats(t);
    UplinkRealization r;
    r.ue_power = t.params.ue_power;
    r.noise_power = t.params.noise_power;
    r.eta = eta.empty() ? std::vector<double>(t.users(), 1.0) : eta;
    for (int c = 0; c < t.cells(); ++c) {
        std::vector<int> nodes;
        for (int n = 0; n < t.nodes(); ++n)
            if (t.node_cell[n] == c) nodes.push_back(n);
        CellObservation obs;
        for (int k = 0; k < t.users(); ++k) {
            std::vector<CMatrix> blocks;
            if (t.user_cell[k] == c) {
                std::vector<CVector> est;
                std::vector<CMatrix> theta;
                for (int n : nodes) {
                    est.push_back(draw_estimate_pair(stats[k][n], rng).estimate);
                    theta.push_back(stats[k][n].err_cov);
                }
                obs.own_users.push_back(k);
                obs.estimates.push_back(stack(est));
                obs.err_cov.push_back(block_diagonal(theta));
            } else {
                for (int n : nodes) blocks.push_back(t.corr[k][n]);
                obs.foreign_users.push_back(k);
                obs.foreign_corr.push_back(block_diagonal(blocks));
            }
        }
        r.cells.push_back(std::move(obs));
    }
    return r;
}

/// Downlink statistics at equal power.
inline DownlinkStatistics toy_downlink(const ToyNetwork& t) {
    const auto stats = toy_stats(t);
    DownlinkStatistics st;
    st.user_cell = t.user_cell;
    st.dl_power = t.dl_power;
    st.noise_power = t.params.noise_power;
    for (int n = 0; n < t.nodes(); ++n) {
        DlNodeStats node;
        node.cell = t.node_cell[n];
        node.eta.assign(t.users(), 0.0);
        node.est_cov.resize(t.users());
        for (int k = 0; k < t.users(); ++k) {
            node.corr.push_back(t.corr[k][n]);
            if (t.user_cell[k] == node.cell) node.est_cov[k] = stats[k][n].est_cov;
        }
        st.nodes.push_back(std::move(node));
    }
    apply_dl(st, equal_power_dl(st));
    return st;
}

// ---------------------------------------------------------------------------
// Estimation oracle

struct MatrixCheck {
    double relative_error = 0.0;
    double tolerance = 0.0;
    bool passes() const { return relative_error <= tolerance; }
};

/// Pilot-level simulation of linear MMSE estimation in StandardMMSE form:
/// every trial draws h ~ CN(0, R), sends τ_p unit-modulus pilot symbols at
/// power p_u through white noise, correlates with the pilot and regresses h on
/// the observation. Returns the relative Frobenius error of the regressed
/// estimate covariance against Φ.
inline MatrixCheck estimation_pilot_oracle(const CMatrix& r, const EstimationParams& p, Rng& rng, long trials = 200000) {
    const Index n = r.rows();
    const CMatrix root = hermitian_sqrt(r);
    const double tp = p.pilot_length;
    std::vector<cdouble> pilot(static_cast<std::size_t>(p.pilot_length));
    for (auto& s : pilot) s = std::polar(1.0, draw_uniform(rng, 0.0, 2.0 * kPi));
    CMatrix cyy = CMatrix::Zero(n, n), chy = CMatrix::Zero(n, n);
    const double noise_scale = std::sqrt(p.noise_power);
    for (long t = 0; t < trials; ++t) {
        const CVector h = root * draw_cn_vector(n, rng);
        CVector y = CVector::Zero(n);
        for (const cdouble s : pilot) y += (std::sqrt(p.ue_power) * s * h + noise_scale * draw_cn_vector(n, rng)) * std::conj(s);
        y /= std::sqrt(tp);
        cyy.noalias() += y * y.adjoint();
        chy.noalias() += h * y.adjoint();
    }
    cyy /= static_cast<double>(trials);
    chy /= static_cast<double>(trials);
    const CMatrix w = chy * cyy.inverse();
    const CMatrix phi_emp = w * cyy * w.adjoint();
    EstimationParams std_params = p;
    std_params.mode = EstimatorNormalization::StandardMMSE;
    const CMatrix phi = estimation_stats(r, std_params).est_cov;
    return {(phi_emp - phi).norm() / phi.norm(), 0.03};
}

// ---------------------------------------------------------------------------
// Grid-search oracles for two-user power control

/// Best min(f(x, y)) over [0, hx]×[0, hy]: a 101-point grid per axis, then a
/// second grid of the same size spanning ±2 coarse steps around the best
/// point.
inline double grid_maxmin_2d(const std::function<double(double, double)>& f, double hx, double hy) {
    double best = -1.0, bx = 0.0, by = 0.0;
    auto scan = [&](double x0, double x1, double y0, double y1) {
        for (int i = 0; i <= 100; ++i)
            for (int j = 0; j <= 100; ++j) {
                const double x = x0 + (x1 - x0) * i / 100.0, y = y0 + (y1 - y0) * j / 100.0;
                const double v = f(x, y);
                if (v > best) best = v, bx = x, by = y;
            }
    };
    scan(0.0, hx, 0.0, hy);
    const double dx = 0.02 * hx, dy = 0.02 * hy;
    scan(std::max(0.0, bx - dx), std::min(hx, bx + dx), std::max(0.0, by - dy), std::min(hy, by + dy));
    return best;
}

struct GridComparison {
    double solver = 0.0;
    double oracle = 0.0;
    double relative_gap() const { return oracle > 0.0 ? std::abs(solver - oracle) / oracle : std::abs(solver); }
    bool passes(double tol = 0.01) const { return relative_gap() <= tol; }
};

/// maxmin_ul against a grid over η ∈ [0, 1]² on a two-user realization.
inline GridComparison ul_grid_check(const UplinkRealization& r) {
    const SinrSystem s = ul_system(r);
    GridComparison g;
    g.solver = maxmin_ul(r).achieved_min_sinr;
    g.oracle = grid_maxmin_2d([&](double x, double y) { return s.sinr(RVector{{x, y}}).minCoeff(); }, 1.0, 1.0);
    return g;
}

/// Family max-min against a grid over the per-user scalars μ on a two-user
/// downlink, under the same family and node budgets.
inline GridComparison dl_family_grid_check(const DownlinkStatistics& st, DlMaxMinBase base) {
    const DlLinkModel m = dl_link_model(st);
    RVector w, baseline;
    const SinrSystem s = dl_family_system(m, base, w, baseline);
    GridComparison g;
    g.solver = maxmin_dl_family(m, base).min_sinr;
    double cap[2];
    for (Index k = 0; k < 2; ++k) {
        cap[k] = std::numeric_limits<double>::infinity();
        for (Index r = 0; r < s.budget.rows(); ++r)
            if (s.budget(r, k) > 0.0) cap[k] = std::min(cap[k], 1.0 / s.budget(r, k));
    }
    g.oracle = grid_maxmin_2d(
        [&](double x, double y) {
            const RVector mu{{x, y}};
            return s.admissible(mu) ? s.sinr(mu).minCoeff() : -1.0;
        },
        cap[0], cap[1]);
    return g;
}

/// Per-node max-min on a two-user, single-cell downlink against a grid over
/// every node's split of its budget. Node n sends u_n = ρ_n·(cos ψ_n, sin ψ_n)
/// with η = u²/tr Φ. The grid over (ρ, ψ) per node starts at 21 points per
/// axis and zooms around the best point, shrinking the span by 4 each pass.
inline GridComparison dl_per_node_grid_check(const DownlinkStatistics& st) {
    const DlLinkModel m = dl_link_model(st);
    GridComparison g;
    g.solver = maxmin_dl_per_node(m).min_sinr;
    const Index L = m.links();
    const Index dims = 2 * m.nodes;
    auto value = [&](const RVector& x) {  // x = (ρ_0, ψ_0, ρ_1, ψ_1, ...)
        RVector eta = RVector::Zero(L);
        for (Index l = 0; l < L; ++l) {
            const double rho = x(2 * m.node[l]), psi = x(2 * m.node[l] + 1);
            const double u = rho * (m.user[l] == 0 ? std::cos(psi) : std::sin(psi));
            eta(l) = m.trace(l) > 0.0 ? u * u / m.trace(l) : 0.0;
        }
        return dl_link_sinr(m, eta).minCoeff();
    };
    RVector lo(dims), hi(dims);
    for (Index d = 0; d < dims; ++d) lo(d) = 0.0, hi(d) = d % 2 ? kPi / 2 : 1.0;
    const RVector upper = hi;
    RVector best = hi, x(dims);
    double best_val = -1.0;
    int points = 20;
    for (int pass = 0; pass < 8; ++pass) {
        std::vector<int> idx(static_cast<std::size_t>(dims), 0);
        for (;;) {
            for (Index d = 0; d < dims; ++d) x(d) = lo(d) + (hi(d) - lo(d)) * idx[d] / points;
            const double v = value(x);
            if (v > best_val) best_val = v, best = x;
            Index d = 0;
            while (d < dims && ++idx[d] > points) idx[d++] = 0;
            if (d == dims) break;
        }
        for (Index d = 0; d < dims; ++d) {
            const double half = (hi(d) - lo(d)) / 8.0;
            lo(d) = std::max(0.0, best(d) - half);
            hi(d) = std::min(upper(d), best(d) + half);
        }
        points = 10;
    }
    g.oracle = best_val;
    return g;
}

// ---------------------------------------------------------------------------
// Suite

struct CheckRow {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct ValidationSuiteOptions {
    std::uint64_t seed = 2024;
    int oracle_instances = 50;
    long oracle_trials = kMinOracleTrials;
    int grid_instances = 20;
    int estimation_instances = 3;
    int identity_instances = 10000;
};

namespace detail {

inline std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

}  // namespace detail

/// Oracle checks on fixed-seed toy instances: interference terms of both
/// links against symbol-level simulation, estimation against pilot-level
/// regression and its identities, and two-user power control against grids.
inline std::vector<CheckRow> run_validation_suite(const ValidationSuiteOptions& o = {}) {
    std::vector<CheckRow> rows;
    Rng rng(o.seed);

    {
        double worst_ul = 0.0, worst_dl = 0.0;
        int terms = 0;
        bool ok_ul = true, ok_dl = true;
        for (int i = 0; i < o.oracle_instances; ++i) {
            const ToyNetwork t = random_toy(rng, {2, 3, 1, 8});
            const UplinkRealization r = toy_uplink(t, rng);
            for (int c = 0; c < t.cells(); ++c)
                for (std::size_t u = 0; u < r.cells[c].own_users.size(); ++u) {
                    const OracleReport rep = ul_interference_oracle(r, c, static_cast<int>(u), rng, o.oracle_trials);
                    for (const auto& term : rep.terms) worst_ul = std::max(worst_ul, term.z_score()), ++terms;
                    worst_ul = std::max(worst_ul, rep.max_cross_z);
                    ok_ul = ok_ul && rep.passes();
                }
            const DownlinkStatistics st = toy_downlink(t);
            for (int k = 0; k < t.users(); ++k) {
                const OracleReport rep = dl_term_oracle(st, k, rng, o.oracle_trials);
                for (const auto& term : rep.terms) worst_dl = std::max(worst_dl, term.z_score()), ++terms;
                worst_dl = std::max(worst_dl, rep.max_cross_z);
                ok_dl = ok_dl && rep.passes();
            }
        }
        rows.push_back({"ul_interference_terms", ok_ul, "max z " + detail::fmt(worst_ul)});
        rows.push_back({"dl_interference_terms", ok_dl, "max z " + detail::fmt(worst_dl)});
    }

    {
        double worst = 0.0;
        bool ok = true;
        for (int i = 0; i < o.estimation_instances; ++i) {
            const CMatrix r = random_psd(4, rng);
            EstimationParams p;
            p.ue_power = 0.1;
            p.pilot_length = 4;
            p.noise_power = 0.05;
            p.mode = EstimatorNormalization::StandardMMSE;
            const MatrixCheck c = estimation_pilot_oracle(r, p, rng);
            worst = std::max(worst, c.relative_error);
            ok = ok && c.passes();
        }
        rows.push_back({"estimation_pilot_regression", ok, "max rel err " + detail::fmt(worst)});
    }

    {
        double worst = 0.0;
        bool ok = true;
        for (int i = 0; i < o.identity_instances; ++i) {
            const Index n = 1 + static_cast<Index>(draw_uniform(rng, 0.0, 8.0 - 1e-9));
            const CMatrix r = random_psd(n, rng, std::pow(10.0, draw_uniform(rng, -12.0, 0.0)));
            for (auto mode : {EstimatorNormalization::PaperVerbatim, EstimatorNormalization::StandardMMSE}) {
                EstimationParams p;
                p.noise_power = 1e-13;
                p.mode = mode;
                const EstimationStats s = estimation_stats(r, p);
                const double rel = (s.est_cov + s.err_cov - r).norm() / r.norm();
                worst = std::max(worst, rel);
                const double tol = -1e-12 * r.norm();
                ok = ok && rel <= 1e-12 && min_eigenvalue(s.est_cov) >= tol && min_eigenvalue(s.err_cov) >= tol;
            }
        }
        rows.push_back({"estimation_identities", ok, "max rel err " + detail::fmt(worst)});
    }

    {
        double worst_ul = 0.0, worst_fam = 0.0, worst_node = 0.0;
        bool ok_ul = true, ok_fam = true, ok_node = true;
        for (int i = 0; i < o.grid_instances; ++i) {
            ToyNetwork t = random_toy(rng, {2, 2, 1, 4});
            while (t.users() != 2) t = random_toy(rng, {2, 2, 1, 4});
            const GridComparison u = ul_grid_check(toy_uplink(t, rng));
            worst_ul = std::max(worst_ul, u.relative_gap());
            ok_ul = ok_ul && u.passes();
            const DownlinkStatistics st = toy_downlink(t);
            for (auto base : {DlMaxMinBase::Uniform, DlMaxMinBase::EqualShare}) {
                const GridComparison d = dl_family_grid_check(st, base);
                worst_fam = std::max(worst_fam, d.relative_gap());
                ok_fam = ok_fam && d.passes();
            }
            ToyNetwork one = random_toy(rng, {1, 2, 2, 4});
            while (one.users() != 2) one = random_toy(rng, {1, 2, 2, 4});
            const GridComparison d = dl_per_node_grid_check(toy_downlink(one));
            worst_node = std::max(worst_node, d.relative_gap());
            ok_node = ok_node && d.passes();
        }
        rows.push_back({"maxmin_ul_grid", ok_ul, "max gap " + detail::fmt(worst_ul)});
        rows.push_back({"maxmin_dl_family_grid", ok_fam, "max gap " + detail::fmt(worst_fam)});
        rows.push_back({"maxmin_dl_per_node_grid", ok_node, "max gap " + detail::fmt(worst_node)});
    }
    return rows;
}

inline bool all_pass(const std::vector<CheckRow>& rows) {
    return std::all_of(rows.begin(), rows.end(), [](const CheckRow& r) { return r.pass; });
}

inline std::string render_checks(const std::vector<CheckRow>& rows) {
    std::ostringstream os;
    std::size_t w = 0;
    for (const auto& r : rows) w = std::max(w, r.name.size());
    for (const auto& r : rows) {
        os << r.name << std::string(w + 2 - r.name.size(), ' ') << (r.pass ? "pass" : "FAIL") << "  " << r.detail << '\n';
    }
    return os.str();
}

}  // namespace hetmimo
