#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "config.hpp"
#include "downlink.hpp"
#include "linalg.hpp"
#include "uplink.hpp"

namespace hetmimo {

/// SINR system γ_k(μ) = μ_k·a_k / ((B·μ)_k + c_k) with μ ≥ 0, μ_k ≤ upper_k and
/// budget rows budget·μ ≤ 1. Both links reduce to this form: UL with μ = η,
/// DL with η_k^n = μ_k·b_k^n.
struct SinrSystem {
    RVector a;
    RMatrix B;
    RVector c;
    RVector upper;  // per-user box bound; +inf when absent
    RMatrix budget; // rows: linear budgets; may have zero rows

    Index size() const { return a.size(); }

    RVector sinr(const RVector& mu) const {
        const RVector den = B * mu + c;
        RVector g(size());
        for (Index k = 0; k < size(); ++k) g(k) = mu(k) * a(k) > 0.0 ? mu(k) * a(k) / den(k) : 0.0;
        return g;
    }

    bool admissible(const RVector& mu, double tol = 1e-9) const {
        for (Index k = 0; k < size(); ++k)
            if (!(mu(k) >= 0.0) || mu(k) > upper(k) * (1.0 + tol)) return false;
        if (budget.rows() > 0 && ((budget * mu).array() > 1.0 + tol).any()) return false;
        return true;
    }

    /// Largest s such that s·μ stays admissible.
    double headroom(const RVector& mu) const {
        double s = std::numeric_limits<double>::infinity();
        for (Index k = 0; k < size(); ++k)
            if (mu(k) > 0.0) s = std::min(s, upper(k) / mu(k));
        if (budget.rows() > 0) {
            const RVector load = budget * mu;
            for (Index r = 0; r < load.size(); ++r)
                if (load(r) > 0.0) s = std::min(s, 1.0 / load(r));
        }
        return s;
    }
};

inline constexpr double kBisectionTolerance = 1e-4;
inline constexpr int kBisectionMaxIterations = 60;
inline constexpr int kFixedPointMaxIterations = 500;

/// Minimal power vector reaching SINR target t for every user, from the linear
/// system (diag(a) − t·B)·μ = t·c. A strictly positive solution exists exactly
/// when the target is reachable without constraints, and it is then the
/// componentwise smallest such vector. Returns false when unreachable.
inline bool minimal_powers(const SinrSystem& s, double t, RVector& mu) {
    const Index n = s.size();
    RMatrix m = -t * s.B;
    m.diagonal() += s.a;
    mu = m.partialPivLu().solve(t * s.c);
    for (Index k = 0; k < n; ++k)
        if (!std::isfinite(mu(k)) || !(mu(k) > 0.0)) return false;
    // reject ill-conditioned solves that do not actually meet the target
    const RVector g = s.sinr(mu);
    return (g.array() >= t * (1.0 - 1e-8)).all();
}

/// Standard interference-function iteration μ ← t·(B·μ + c)/a from μ = 0.
/// Returns false when a component exceeds its upper bound or the iteration
/// does not settle.
inline bool fixed_point_powers(const SinrSystem& s, double t, RVector& mu, int max_iter = kFixedPointMaxIterations) {
    mu = RVector::Zero(s.size());
    for (int it = 0; it < max_iter; ++it) {
        RVector next = t * (s.B * mu + s.c);
        for (Index k = 0; k < s.size(); ++k) next(k) /= s.a(k);
        if ((next.array() > s.upper.array()).any()) return false;
        const double change = (next - mu).cwiseAbs().maxCoeff();
        mu = next;
        if (change <= 1e-12 * std::max(1e-300, mu.cwiseAbs().maxCoeff())) return true;
    }
    return false;
}

struct MaxMinResult {
    RVector mu;
    double min_sinr = 0.0;
    int iterations = 0;
    bool warning = false;  // solver fell back to the baseline allocation
};

/// Bisection on a common SINR target. `baseline` must be admissible; its
/// minimum SINR is the lower end, so the result never does worse.
inline MaxMinResult solve_maxmin(const SinrSystem& s, const RVector& baseline) {
    MaxMinResult res;
    res.mu = baseline;
    const RVector g0 = s.sinr(baseline);
    double lo = s.size() ? g0.minCoeff() : 0.0;
    res.min_sinr = lo;
    if (s.size() == 0) return res;
    for (Index k = 0; k < s.size(); ++k)
        if (!(s.a(k) > 0.0)) return res;  // a user without signal caps the minimum at 0

    double hi = std::numeric_limits<double>::infinity();
    for (Index k = 0; k < s.size(); ++k) {
        double cap = s.upper(k);
        if (s.budget.rows() > 0)
            for (Index r = 0; r < s.budget.rows(); ++r)
                if (s.budget(r, k) > 0.0) cap = std::min(cap, 1.0 / s.budget(r, k));
        hi = std::min(hi, cap * s.a(k) / (cap * s.B(k, k) + s.c(k)));
    }
    if (!(hi > lo)) return res;

    RVector best;
    if (lo > 0.0 && minimal_powers(s, lo, best) && s.admissible(best)) {
        res.mu = best;
    } else if (lo > 0.0) {
        res.warning = true;
        return res;
    }
    RVector trial;
    while (res.iterations < kBisectionMaxIterations && hi - lo > kBisectionTolerance * hi) {
        ++res.iterations;
        const double mid = 0.5 * (lo + hi);
        if (minimal_powers(s, mid, trial) && s.admissible(trial)) {
            lo = mid;
            res.mu = trial;
        } else {
            hi = mid;
        }
    }
    // Uniform scaling up to the first active constraint raises every SINR.
    const double room = s.headroom(res.mu);
    if (std::isfinite(room) && room > 1.0) res.mu *= room;
    res.min_sinr = s.sinr(res.mu).minCoeff();
    return res;
}

/// Restriction to a subset of users: the others keep powers `fixed` and
/// contribute to noise.
inline SinrSystem restrict_system(const SinrSystem& s, const std::vector<Index>& idx, const RVector& fixed) {
    const Index n = static_cast<Index>(idx.size());
    SinrSystem r;
    r.a.resize(n);
    r.B.resize(n, n);
    r.c.resize(n);
    r.upper.resize(n);
    std::vector<char> inside(s.size(), 0);
    for (Index i : idx) inside[i] = 1;
    for (Index p = 0; p < n; ++p) {
        const Index k = idx[p];
        r.a(p) = s.a(k);
        r.upper(p) = s.upper(k);
        double extra = 0.0;
        for (Index j = 0; j < s.size(); ++j)
            if (!inside[j]) extra += s.B(k, j) * fixed(j);
        r.c(p) = s.c(k) + extra;
        for (Index q = 0; q < n; ++q) r.B(p, q) = s.B(k, idx[q]);
    }
    // keep only budget rows touching the subset; rows never mix subsets here
    std::vector<Index> rows;
    for (Index row = 0; row < s.budget.rows(); ++row)
        for (Index i : idx)
            if (s.budget(row, i) != 0.0) { rows.push_back(row); break; }
    r.budget.resize(static_cast<Index>(rows.size()), n);
    for (Index rr = 0; rr < static_cast<Index>(rows.size()); ++rr)
        for (Index q = 0; q < n; ++q) r.budget(rr, q) = s.budget(rows[rr], idx[q]);
    return r;
}

/// Max-min over all users jointly (groups empty) or independently per group,
/// each group designing against the others at their baseline powers.
inline MaxMinResult solve_maxmin_scoped(const SinrSystem& s, const RVector& baseline,
                                        const std::vector<std::vector<Index>>& groups) {
    if (groups.empty()) return solve_maxmin(s, baseline);
    MaxMinResult out;
    out.mu = baseline;
    for (const auto& g : groups) {
        if (g.empty()) continue;
        const SinrSystem sub = restrict_system(s, g, baseline);
        RVector b(static_cast<Index>(g.size()));
        for (Index p = 0; p < b.size(); ++p) b(p) = baseline(g[p]);
        const MaxMinResult r = solve_maxmin(sub, b);
        for (Index p = 0; p < b.size(); ++p) out.mu(g[p]) = r.mu(p);
        out.iterations = std::max(out.iterations, r.iterations);
        out.warning = out.warning || r.warning;
    }
    out.min_sinr = s.size() ? s.sinr(out.mu).minCoeff() : 0.0;
    return out;
}

// ---------------------------------------------------------------------------
// Allocations on the reference data types.

struct PowerAllocation {
    std::vector<double> ul_eta;
    std::vector<std::vector<double>> dl_eta;  // [node][user]
    double achieved_min_sinr = 0.0;
    bool warning = false;
};

inline PowerAllocation full_power_ul(int users) {
    PowerAllocation p;
    p.ul_eta.assign(static_cast<std::size_t>(users), 1.0);
    return p;
}

inline PowerAllocation full_power_ul(const ScenarioConfig& cfg) { return full_power_ul(cfg.users_total); }

/// Equal split of every node's budget among the users it serves:
/// η_j = 1/(K'·tr Φ_j) with K' the number of served users with nonzero tr Φ.
inline std::vector<double> equal_share(const std::vector<double>& traces, const std::vector<char>& served) {
    std::vector<double> eta(traces.size(), 0.0);
    int count = 0;
    for (std::size_t j = 0; j < traces.size(); ++j)
        if (served[j] && traces[j] > 0.0) ++count;
    for (std::size_t j = 0; j < traces.size(); ++j)
        if (served[j] && traces[j] > 0.0) eta[j] = 1.0 / (count * traces[j]);
    return eta;
}

inline PowerAllocation equal_power_dl(const DownlinkStatistics& s) {
    PowerAllocation p;
    for (const auto& node : s.nodes) {
        std::vector<double> tr(s.users(), 0.0);
        std::vector<char> served(s.users(), 0);
        for (std::size_t j = 0; j < s.users(); ++j) {
            if (s.user_cell[j] != node.cell) continue;
            served[j] = 1;
            tr[j] = node.est_cov[j].trace().real();
        }
        p.dl_eta.push_back(equal_share(tr, served));
    }
    return p;
}

/// Uplink system of a reference realization: a_k = ‖ĥ_k‖⁴, c_k = σ²/p_u·‖ĥ_k‖²,
/// B_kj the interference coefficient of user j at user k's combiner.
inline SinrSystem ul_system(const UplinkRealization& r) {
    const Index n = static_cast<Index>(r.eta.size());
    SinrSystem s;
    s.a = RVector::Zero(n);
    s.c = RVector::Zero(n);
    s.B = RMatrix::Zero(n, n);
    s.upper = RVector::Ones(n);
    for (const auto& obs : r.cells) {
        for (std::size_t i = 0; i < obs.own_users.size(); ++i) {
            const CVector& h = obs.estimates[i];
            const int k = obs.own_users[i];
            const double n2 = h.squaredNorm();
            s.a(k) = n2 * n2;
            s.c(k) = r.noise_power / r.ue_power * n2;
            for (std::size_t j = 0; j < obs.own_users.size(); ++j) {
                double v = h.dot(obs.err_cov[j] * h).real();
                if (j != i) v += std::norm(h.dot(obs.estimates[j]));
                s.B(k, obs.own_users[j]) = v;
            }
            for (std::size_t j = 0; j < obs.foreign_users.size(); ++j)
                s.B(k, obs.foreign_users[j]) = h.dot(obs.foreign_corr[j] * h).real();
        }
    }
    return s;
}

inline PowerAllocation maxmin_ul(const UplinkRealization& r, const std::vector<std::vector<Index>>& groups = {}) {
    const SinrSystem s = ul_system(r);
    const MaxMinResult m = solve_maxmin_scoped(s, RVector::Ones(s.size()), groups);
    PowerAllocation p;
    p.ul_eta.assign(m.mu.data(), m.mu.data() + m.mu.size());
    p.achieved_min_sinr = m.min_sinr;
    p.warning = m.warning;
    return p;
}

// ---------------------------------------------------------------------------
// Downlink max-min on per-link statistics.

/// Statistical downlink with one power coefficient per serving link l (user
/// user[l] served by node node[l]): trace(l) = tr Φ_l and cross(k, l) =
/// tr(R_k Φ_l) at that node. With η per link,
///   SINR_k = (Σ_{l of k} √η_l·trace_l)² / (Σ_l η_l·cross(k, l) + noise),
/// and node n must keep Σ_{l at n} η_l·trace_l ≤ 1.
struct DlLinkModel {
    Index users = 0;
    Index nodes = 0;
    std::vector<Index> user;
    std::vector<Index> node;
    RVector trace;
    RMatrix cross;  // users × links
    double noise = 0.0;

    Index links() const { return static_cast<Index>(user.size()); }
};

inline DlLinkModel dl_link_model(const DownlinkStatistics& st) {
    DlLinkModel m;
    m.users = static_cast<Index>(st.users());
    m.nodes = static_cast<Index>(st.nodes.size());
    m.noise = st.noise_power / st.dl_power;
    std::vector<double> tr;
    std::vector<RVector> cols;
    for (Index l = 0; l < m.nodes; ++l) {
        const auto& nd = st.nodes[l];
        for (Index j = 0; j < m.users; ++j) {
            if (st.user_cell[j] != nd.cell) continue;
            m.user.push_back(j);
            m.node.push_back(l);
            tr.push_back(nd.est_cov[j].trace().real());
            RVector c(m.users);
            for (Index k = 0; k < m.users; ++k) c(k) = trace_product(nd.corr[k], nd.est_cov[j]);
            cols.push_back(std::move(c));
        }
    }
    m.trace = Eigen::Map<const RVector>(tr.data(), static_cast<Index>(tr.size()));
    m.cross.resize(m.users, m.links());
    for (Index l = 0; l < m.links(); ++l) m.cross.col(l) = cols[l];
    return m;
}

inline RVector dl_link_sinr(const DlLinkModel& m, const RVector& eta) {
    RVector amp = RVector::Zero(m.users);
    for (Index l = 0; l < m.links(); ++l) amp(m.user[l]) += std::sqrt(std::max(eta(l), 0.0)) * m.trace(l);
    const RVector den = m.cross * eta + RVector::Constant(m.users, m.noise);
    RVector g(m.users);
    for (Index k = 0; k < m.users; ++k) g(k) = amp(k) > 0.0 ? amp(k) * amp(k) / den(k) : 0.0;
    return g;
}

/// Users served per node, counting links with nonzero tr Φ.
inline std::vector<int> dl_node_loads(const DlLinkModel& m) {
    std::vector<int> load(static_cast<std::size_t>(m.nodes), 0);
    for (Index l = 0; l < m.links(); ++l)
        if (m.trace(l) > 0.0) ++load[m.node[l]];
    return load;
}

/// Equal power: η_l = 1/(K'_n·tr Φ_l).
inline RVector dl_equal_links(const DlLinkModel& m) {
    const auto load = dl_node_loads(m);
    RVector eta = RVector::Zero(m.links());
    for (Index l = 0; l < m.links(); ++l)
        if (m.trace(l) > 0.0) eta(l) = 1.0 / (load[m.node[l]] * m.trace(l));
    return eta;
}

/// Per-link shape b_l of the family η_l = μ_{user(l)}·b_l.
inline double dl_base_weight(DlMaxMinBase base, double trace) {
    if (base == DlMaxMinBase::Uniform) return 1.0;
    return trace > 0.0 ? 1.0 / trace : 0.0;
}

/// System in μ for the family η_l = μ_{user(l)}·b_l. `baseline` receives the μ
/// reproducing equal power (EqualShare; a user on nodes with different loads
/// takes the tightest share) or the largest common μ (Uniform).
/// System in μ for the shape η_l = μ_{user(l)}·weights_l.
inline SinrSystem dl_shape_system(const DlLinkModel& m, const RVector& weights) {
    SinrSystem s;
    s.c = RVector::Constant(m.users, m.noise);
    s.B = RMatrix::Zero(m.users, m.users);
    s.upper = RVector::Constant(m.users, std::numeric_limits<double>::infinity());
    s.budget = RMatrix::Zero(m.nodes, m.users);
    RVector amp = RVector::Zero(m.users);
    for (Index l = 0; l < m.links(); ++l) {
        const double b = weights(l);
        const Index j = m.user[l];
        amp(j) += std::sqrt(b) * m.trace(l);
        s.budget(m.node[l], j) += b * m.trace(l);
        s.B.col(j) += b * m.cross.col(l);
    }
    s.a = amp.cwiseProduct(amp);
    return s;
}

inline SinrSystem dl_family_system(const DlLinkModel& m, DlMaxMinBase base, RVector& weights, RVector& baseline) {
    weights.resize(m.links());
    for (Index l = 0; l < m.links(); ++l) weights(l) = dl_base_weight(base, m.trace(l));
    SinrSystem s = dl_shape_system(m, weights);
    if (base == DlMaxMinBase::EqualShare) {
        const auto load = dl_node_loads(m);
        baseline = RVector::Constant(m.users, std::numeric_limits<double>::infinity());
        for (Index l = 0; l < m.links(); ++l)
            if (m.trace(l) > 0.0) baseline(m.user[l]) = std::min(baseline(m.user[l]), 1.0 / load[m.node[l]]);
        for (Index j = 0; j < m.users; ++j)
            if (!std::isfinite(baseline(j))) baseline(j) = 0.0;
    } else {
        const RVector ones = RVector::Ones(m.users);
        const double room = s.headroom(ones);
        baseline = std::isfinite(room) ? RVector(ones * room) : ones;
    }
    return s;
}

struct DlMaxMinResult {
    RVector eta;  // per link
    RVector sinr;
    double min_sinr = 0.0;
    bool warning = false;
};

inline DlMaxMinResult maxmin_dl_family(const DlLinkModel& m, DlMaxMinBase base,
                                       const std::vector<std::vector<Index>>& groups = {}) {
    RVector w, baseline;
    const SinrSystem s = dl_family_system(m, base, w, baseline);
    const MaxMinResult r = solve_maxmin_scoped(s, baseline, groups);
    DlMaxMinResult out;
    out.eta.resize(m.links());
    for (Index l = 0; l < m.links(); ++l) out.eta(l) = r.mu(m.user[l]) * w(l);
    out.sinr = dl_link_sinr(m, out.eta);
    out.min_sinr = out.sinr.size() ? out.sinr.minCoeff() : 0.0;
    out.warning = r.warning;
    return out;
}

/// Soft-min sharpness and Adam step, both multiplied by their factors after
/// every tenth of the iterations.
struct AscentSchedule {
    int iterations;
    double beta;
    double beta_growth;
    double step;
    double step_decay;
};

inline constexpr AscentSchedule kCoarseAscent{300, 5.0, 1.5, 0.05, 0.7};

namespace detail {

/// Links and users of one max-min scope in noise-normalized variables
/// u_i = √(η_i·trace_i): user k sees amplitude N_k = Σ_{i of k} g_i·u_i and
/// denominator D_k² = Σ_i C(k, i)·u_i² + extra_k, so SINR_k = N_k²/D_k². The
/// links outside the scope keep their powers and sit in extra_k. Node budgets
/// become ‖u_n‖ ≤ 1.
struct ScopedDl {
    std::vector<Index> links;
    std::vector<Index> owner;  // local user of each link
    std::vector<Index> node;
    RVector g;
    RMatrix C;
    RVector extra;
    Index nodes = 0;

    Index L() const { return static_cast<Index>(links.size()); }
    Index K() const { return C.rows(); }

    ScopedDl(const DlLinkModel& m, const std::vector<char>& active, const RVector& eta) : nodes(m.nodes) {
        std::vector<Index> users, local(static_cast<std::size_t>(m.users), -1);
        for (Index k = 0; k < m.users; ++k)
            if (active[k]) local[k] = static_cast<Index>(users.size()), users.push_back(k);
        for (Index l = 0; l < m.links(); ++l)
            if (active[m.user[l]] && m.trace(l) > 0.0) links.push_back(l);
        const Index n = L(), k_count = static_cast<Index>(users.size());
        std::vector<char> inside(static_cast<std::size_t>(m.links()), 0);
        for (Index l : links) inside[l] = 1;
        RVector fixed = RVector::Zero(m.links());
        for (Index l = 0; l < m.links(); ++l)
            if (!inside[l]) fixed(l) = eta(l);
        const RVector out_of_scope = m.cross * fixed;
        extra.resize(k_count);
        for (Index i = 0; i < k_count; ++i) extra(i) = 1.0 + out_of_scope(users[i]) / m.noise;
        g.resize(n);
        C.resize(k_count, n);
        for (Index i = 0; i < n; ++i) {
            const Index l = links[i];
            g(i) = std::sqrt(m.trace(l) / m.noise);
            owner.push_back(local[m.user[l]]);
            node.push_back(m.node[l]);
            for (Index k = 0; k < k_count; ++k) C(k, i) = m.cross(users[k], l) / m.trace(l) / m.noise;
        }
    }

    RVector start(const DlLinkModel& m, const RVector& eta) const {
        RVector u(L());
        for (Index i = 0; i < L(); ++i) u(i) = std::sqrt(std::max(eta(links[i]), 0.0) * m.trace(links[i]));
        return u;
    }

    void store(const DlLinkModel& m, const RVector& u, RVector& eta) const {
        for (Index i = 0; i < L(); ++i) eta(links[i]) = u(i) * u(i) / m.trace(links[i]);
    }

    RVector node_load(const RVector& u) const {
        RVector load = RVector::Zero(nodes);
        for (Index i = 0; i < L(); ++i) load(node[i]) += u(i) * u(i);
        return load;
    }

    /// Euclidean projection onto u ≥ 0, ‖u_n‖ ≤ 1.
    void project(RVector& u) const {
        u = u.cwiseMax(0.0);
        const RVector load = node_load(u);
        for (Index i = 0; i < L(); ++i)
            if (load(node[i]) > 1.0) u(i) /= std::sqrt(load(node[i]));
    }

    /// Common scaling up to the tightest node; raises every SINR.
    void saturate(RVector& u) const {
        const double top = node_load(u).maxCoeff();
        if (top > 0.0) u /= std::sqrt(top);
    }

    void evaluate(const RVector& u, RVector& N, RVector& D) const {
        N = RVector::Zero(K());
        for (Index i = 0; i < L(); ++i) N(owner[i]) += g(i) * u(i);
        D = (C * u.cwiseProduct(u) + extra).cwiseSqrt();
    }

    double min_sinr(const RVector& u) const {
        RVector N, D;
        evaluate(u, N, D);
        return (N.cwiseQuotient(D)).cwiseAbs2().minCoeff();
    }
};

/// Projected Adam ascent on a soft minimum of log SINR. Cheap and fast to get
/// close; returns the best saturated iterate.
inline RVector adam_ascent(const ScopedDl& s, RVector u, const AscentSchedule& sched) {
    const Index L = s.L(), K = s.K();
    s.project(u);
    RVector best = u;
    s.saturate(best);
    double best_val = std::max(s.min_sinr(u), s.min_sinr(best));
    if (s.min_sinr(u) > s.min_sinr(best)) best = u;
    RVector m1 = RVector::Zero(L), m2 = RVector::Zero(L), grad(L), w(K), back(L), N, D, logs(K);
    double beta = sched.beta, step = sched.step;
    const int phase = std::max(1, sched.iterations / 10);
    for (int it = 1; it <= sched.iterations; ++it) {
        s.evaluate(u, N, D);
        for (Index k = 0; k < K; ++k) logs(k) = N(k) > 0.0 ? 2.0 * std::log(N(k) / D(k)) : -700.0;
        const double lmin = logs.minCoeff();
        for (Index k = 0; k < K; ++k) w(k) = std::exp(-beta * (logs(k) - lmin));
        w /= w.sum();
        back = s.C.transpose() * w.cwiseQuotient(D.cwiseAbs2());
        for (Index i = 0; i < L; ++i) {
            const Index k = s.owner[i];
            grad(i) = (N(k) > 0.0 ? 2.0 * w(k) * s.g(i) / N(k) : 0.0) - 2.0 * u(i) * back(i);
        }
        m1 = 0.9 * m1 + 0.1 * grad;
        m2 = 0.999 * m2 + 0.001 * grad.cwiseAbs2();
        const double c1 = 1.0 - std::pow(0.9, it), c2 = 1.0 - std::pow(0.999, it);
        u.array() += step * (m1.array() / c1) / ((m2.array() / c2).sqrt() + 1e-12);
        s.project(u);
        RVector sat = u;
        s.saturate(sat);
        const double v = s.min_sinr(sat);
        if (v > best_val) best = sat, best_val = v;
        if (it % phase == 0) beta *= sched.beta_growth, step *= sched.step_decay;
    }
    return best;
}

inline constexpr int kRatioOuterIterations = 12;
inline constexpr int kRatioInnerIterations = 120;
inline constexpr double kRatioInnerTolerance = 1e-6;

/// Generalized fractional refinement of max_u min_k N_k/D_k. With λ the
/// current minimum ratio, each round maximizes the concave soft minimum of
/// the margins (N_k − λ·D_k)/(λ·D̄) by projected gradient with backtracking,
/// then updates λ. N is linear and D a norm, so every round is a concave
/// problem, and λ only increases.
inline RVector ratio_refine(const ScopedDl& s, RVector u) {
    const Index L = s.L(), K = s.K();
    s.project(u);
    s.saturate(u);
    RVector N, D, w(K), grad(L), back(L);
    double lambda = std::sqrt(s.min_sinr(u));
    if (!(lambda > 0.0)) return u;
    RVector best = u;
    double beta = std::max(50.0, 200.0 * std::log(static_cast<double>(K)));
    for (int outer = 0; outer < kRatioOuterIterations; ++outer) {
        s.evaluate(u, N, D);
        const double scale = lambda * D.mean();
        auto objective = [&](const RVector& x, RVector* gr) {
            RVector n, d;
            s.evaluate(x, n, d);
            RVector margin = (n - lambda * d) / scale;
            const double lo = margin.minCoeff();
            RVector e = (-beta * (margin.array() - lo)).exp().matrix();
            const double total = e.sum();
            if (gr) {
                w = e / total;
                back = s.C.transpose() * w.cwiseQuotient(d);
                for (Index i = 0; i < L; ++i) (*gr)(i) = (w(s.owner[i]) * s.g(i) - lambda * x(i) * back(i)) / scale;
            }
            return lo - std::log(total) / beta;
        };
        double step = 1.0 / (beta * (s.g.squaredNorm() / (scale * scale) + 1.0));
        double val = objective(u, &grad);
        double checkpoint = val;
        for (int it = 0; it < kRatioInnerIterations; ++it) {
            if (it % 10 == 9) {
                if (val - checkpoint < kRatioInnerTolerance) break;
                checkpoint = val;
            }
            bool moved = false;
            for (int tries = 0; tries < 40; ++tries) {
                RVector cand = u + step * grad;
                s.project(cand);
                const RVector delta = cand - u;
                const double dn = delta.squaredNorm();
                if (dn == 0.0) break;
                RVector cgrad(L);
                const double cval = objective(cand, &cgrad);
                if (cval >= val + grad.dot(delta) - dn / (2.0 * step)) {
                    u = cand;
                    val = cval;
                    grad = cgrad;
                    step *= 1.5;
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if (!moved) break;
        }
        s.saturate(u);
        const double next = std::sqrt(s.min_sinr(u));
        if (next > lambda) best = u;
        if (!(next > lambda * (1.0 + 1e-7))) {
            beta *= 2.0;
            if (beta > 1e5) break;
        }
        lambda = std::max(lambda, next);
        u = best;
    }
    return best;
}

}  // namespace detail

/// Max-min with an independent coefficient on every serving link. Users whose
/// links all sit on one node are covered exactly by the family solver, which
/// handles them. Otherwise a projected Adam ascent from equal power gets
/// close, the fractional refinement converges, and a bisection over per-user
/// scalars on the final shape equalizes what is left. Groups design against
/// the others at equal power.
inline DlMaxMinResult maxmin_dl_per_node(const DlLinkModel& m, const std::vector<std::vector<Index>>& groups = {}) {
    std::vector<int> links_of(static_cast<std::size_t>(m.users), 0);
    for (Index l = 0; l < m.links(); ++l) ++links_of[m.user[l]];
    if (std::all_of(links_of.begin(), links_of.end(), [](int c) { return c <= 1; }))
        return maxmin_dl_family(m, DlMaxMinBase::EqualShare, groups);

    const RVector start = dl_equal_links(m);
    RVector eta = start;
    auto solve = [&](const std::vector<char>& active) {
        const detail::ScopedDl s(m, active, start);
        if (s.L() == 0 || s.K() == 0) return;
        RVector u = detail::adam_ascent(s, s.start(m, start), kCoarseAscent);
        u = detail::ratio_refine(s, u);
        s.store(m, u, eta);
    };
    if (groups.empty()) {
        solve(std::vector<char>(static_cast<std::size_t>(m.users), 1));
    } else {
        for (const auto& grp : groups) {
            std::vector<char> active(static_cast<std::size_t>(m.users), 0);
            for (Index k : grp) active[k] = 1;
            solve(active);
        }
    }
    const MaxMinResult r = solve_maxmin_scoped(dl_shape_system(m, eta), RVector::Ones(m.users), groups);
    if (!r.warning)
        for (Index l = 0; l < m.links(); ++l) eta(l) *= r.mu(m.user[l]);

    DlMaxMinResult out;
    out.eta = std::move(eta);
    out.sinr = dl_link_sinr(m, out.eta);
    out.min_sinr = out.sinr.size() ? out.sinr.minCoeff() : 0.0;
    return out;
}

inline DlMaxMinResult maxmin_dl_links(const DlLinkModel& m, DlMaxMinSolver solver, DlMaxMinBase base,
                                      const std::vector<std::vector<Index>>& groups = {}) {
    return solver == DlMaxMinSolver::PerNode ? maxmin_dl_per_node(m, groups) : maxmin_dl_family(m, base, groups);
}

inline PowerAllocation maxmin_dl(const DownlinkStatistics& st, DlMaxMinSolver solver = DlMaxMinSolver::PerNode,
                                 DlMaxMinBase base = DlMaxMinBase::EqualShare,
                                 const std::vector<std::vector<Index>>& groups = {}) {
    const DlLinkModel m = dl_link_model(st);
    const DlMaxMinResult r = maxmin_dl_links(m, solver, base, groups);
    PowerAllocation p;
    p.dl_eta.assign(st.nodes.size(), std::vector<double>(st.users(), 0.0));
    for (Index l = 0; l < m.links(); ++l) p.dl_eta[m.node[l]][m.user[l]] = r.eta(l);
    p.achieved_min_sinr = r.min_sinr;
    p.warning = r.warning;
    return p;
}

/// Copies DL coefficients into the statistics (η per node and user).
inline void apply_dl(DownlinkStatistics& st, const PowerAllocation& p) {
    for (std::size_t l = 0; l < st.nodes.size(); ++l) st.nodes[l].eta = p.dl_eta.at(l);
}

inline void apply_ul(UplinkRealization& r, const PowerAllocation& p) { r.eta = p.ul_eta; }

}  // namespace hetmimo
