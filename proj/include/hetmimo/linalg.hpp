#pragma once

#include <cmath>
#include <array>
#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace hetmimo {

using cdouble = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline bool is_hermitian(const CMatrix& m, double rel_tol = 1e-10) {
    if (m.rows() != m.cols()) return false;
    const double scale = std::max(1e-300, m.cwiseAbs().maxCoeff());
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

inline double min_eigenvalue(const CMatrix& m) {
    if (m.size() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

/// PSD up to floating-point noise: smallest eigenvalue ≥ -tol·|trace|.
inline bool is_psd(const CMatrix& m, double tol = 1e-10) {
    if (!is_hermitian(m, 1e-9)) return false;
    const double tr = std::abs(m.trace().real());
    return min_eigenvalue(m) >= -tol * std::max(tr, 1e-300);
}

/// Hermitian PSD square root by eigendecomposition; eigenvalues below zero are
/// clipped to zero.
inline CMatrix hermitian_sqrt(const CMatrix& m) {
    if (!is_hermitian(m, 1e-9)) throw std::domain_error("hermitian_sqrt: matrix is not Hermitian");
    if (m.size() == 0) return m;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(m);
    const RVector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().adjoint();
}

/// Real part of tr(A·B); exact for Hermitian A and B whose product trace is real.
inline double trace_product(const CMatrix& a, const CMatrix& b) {
    return (a.array() * b.transpose().array()).sum().real();
}

/// Block-diagonal assembly.
inline CMatrix block_diagonal(const std::vector<CMatrix>& blocks) {
    Index n = 0;
    for (const auto& b : blocks) n += b.rows();
    CMatrix out = CMatrix::Zero(n, n);
    Index off = 0;
    for (const auto& b : blocks) {
        out.block(off, off, b.rows(), b.cols()) = b;
        off += b.rows();
    }
    return out;
}

inline CVector stack(const std::vector<CVector>& parts) {
    Index n = 0;
    for (const auto& p : parts) n += p.size();
    CVector out(n);
    Index off = 0;
    for (const auto& p : parts) {
        out.segment(off, p.size()) = p;
        off += p.size();
    }
    return out;
}

// ---------------------------------------------------------------------------
// Hermitian Toeplitz helpers. A generator r(0..N-1) describes R(m,n) = r(m-n)
// for m ≥ n and conj(r(n-m)) otherwise.

inline CMatrix toeplitz_from_generator(const CVector& r) {
    const Index n = r.size();
    CMatrix m(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index k = 0; k < n; ++k) m(i, k) = i >= k ? r(i - k) : std::conj(r(k - i));
    return m;
}

/// Lag sums s(d) = Σ_n M(n, n+d), d = 0..N-1.
inline CVector lag_sums(const CMatrix& m) {
    const Index n = m.rows();
    CVector s = CVector::Zero(n);
    for (Index d = 0; d < n; ++d) {
        cdouble acc = 0.0;
        for (Index i = 0; i + d < n; ++i) acc += m(i, i + d);
        s(d) = acc;
    }
    return s;
}

/// Lag products a(d) = Σ_n conj(x(n+d))·x(n), d = 0..N-1; the lag sums of x·x^H.
inline CVector lag_products(const CVector& x) {
    const Index n = x.size();
    CVector a(n);
    for (Index d = 0; d < n; ++d) {
        cdouble acc = 0.0;
        for (Index i = 0; i + d < n; ++i) acc += std::conj(x(i + d)) * x(i);
        a(d) = acc;
    }
    return a;
}

/// tr(R·M) for Hermitian Toeplitz R (generator r) and Hermitian M given by its
/// lag sums s. With s = lag_products(x) this is the quadratic form x^H·R·x.
inline double toeplitz_contract(const CVector& r, const CVector& s) {
    double acc = r(0).real() * s(0).real();
    double off = 0.0;
    for (Index d = 1; d < r.size(); ++d) off += (r(d) * s(d)).real();
    return acc + 2.0 * off;
}

// ---------------------------------------------------------------------------
// Centro-Hermitian reduction. A Hermitian Toeplitz matrix R satisfies
// J·R·J = conj(R), so with the unitary Q below, Q^H·R·Q is real symmetric.
// Columns of Q: (e_i + e_i')/√2 for i < m, e_m when N is odd, then
// j(e_i - e_i')/√2 for i < m, where i' = N-1-i and m = N/2.

inline CVector centro_apply_q(const CVector& v) {
    const Index n = v.size(), m = n / 2, anti = n - m;
    constexpr double s = 0.70710678118654752440;
    CVector out(n);
    for (Index i = 0; i < m; ++i) {
        const cdouble sym = v(i) * s;
        const cdouble asym = cdouble(0.0, 1.0) * v(anti + i) * s;
        out(i) = sym + asym;
        out(n - 1 - i) = sym - asym;
    }
    if (n % 2) out(m) = v(m);
    return out;
}

inline CVector centro_apply_qh(const CVector& x) {
    const Index n = x.size(), m = n / 2, anti = n - m;
    constexpr double s = 0.70710678118654752440;
    CVector out(n);
    for (Index i = 0; i < m; ++i) {
        out(i) = (x(i) + x(n - 1 - i)) * s;
        out(anti + i) = cdouble(0.0, -1.0) * (x(i) - x(n - 1 - i)) * s;
    }
    if (n % 2) out(m) = x(m);
    return out;
}

/// Column-wise Q^H·X.
inline CMatrix centro_apply_qh(const CMatrix& x) {
    CMatrix out(x.rows(), x.cols());
    for (Index c = 0; c < x.cols(); ++c) out.col(c) = centro_apply_qh(CVector(x.col(c)));
    return out;
}

/// Real symmetric S = Q^H·R·Q for centro-Hermitian R.
inline RMatrix centro_real_form(const CMatrix& r) {
    const CMatrix y = centro_apply_qh(r);                      // Q^H R
    const CMatrix s = centro_apply_qh(CMatrix(y.adjoint())).adjoint();  // (Q^H (Q^H R)^H)^H = Q^H R Q
    return s.real();
}

/// Real form Q^H·R·Q straight from the Toeplitz generator, without forming R.
inline RMatrix centro_real_form_toeplitz(const CVector& r) {
    const Index n = r.size(), m = n / 2, anti = n - m;
    constexpr double s = 0.70710678118654752440;
    // Column c of Q has at most two nonzeros: coef[c][t] at row idx[c][t].
    std::vector<std::array<Index, 2>> idx(n);
    std::vector<std::array<cdouble, 2>> coef(n);
    std::vector<int> nnz(n, 2);
    for (Index i = 0; i < m; ++i) {
        idx[i] = {i, n - 1 - i};
        coef[i] = {cdouble(s, 0.0), cdouble(s, 0.0)};
        idx[anti + i] = {i, n - 1 - i};
        coef[anti + i] = {cdouble(0.0, s), cdouble(0.0, -s)};
    }
    if (n % 2) {
        idx[m] = {m, m};
        coef[m] = {cdouble(1.0, 0.0), cdouble(0.0, 0.0)};
        nnz[m] = 1;
    }
    auto entry = [&](Index a, Index b) { return a >= b ? r(a - b) : std::conj(r(b - a)); };
    RMatrix out(n, n);
    for (Index p = 0; p < n; ++p)
        for (Index q = p; q < n; ++q) {
            cdouble acc = 0.0;
            for (int a = 0; a < nnz[p]; ++a)
                for (int b = 0; b < nnz[q]; ++b) acc += std::conj(coef[p][a]) * coef[q][b] * entry(idx[p][a], idx[q][b]);
            out(p, q) = out(q, p) = acc.real();
        }
    return out;
}

/// Q·P·Q^H for real symmetric P, returned as a dense complex matrix.
inline CMatrix centro_expand(const RMatrix& p) {
    const Index n = p.rows();
    CMatrix tmp(n, n);
    for (Index c = 0; c < n; ++c) tmp.col(c) = centro_apply_q(CVector(p.col(c).cast<cdouble>()));
    // tmp = Q P; result = (Q (Q P)^H)^H = Q P Q^H.
    CMatrix out(n, n);
    const CMatrix th = tmp.adjoint();
    for (Index c = 0; c < n; ++c) out.col(c) = centro_apply_q(CVector(th.col(c)));
    return out.adjoint();
}

/// Rows of Q: row a has at most two nonzeros, coef[t] in column col[t].
struct CentroRow {
    std::array<Index, 2> col{};
    std::array<cdouble, 2> coef{};
    int count = 0;
};

inline std::vector<CentroRow> centro_rows(Index n) {
    const Index m = n / 2, anti = n - m;
    constexpr double s = 0.70710678118654752440;
    std::vector<CentroRow> rows(n);
    for (Index i = 0; i < m; ++i) {
        rows[i] = {{i, anti + i}, {cdouble(s, 0.0), cdouble(0.0, s)}, 2};
        rows[n - 1 - i] = {{i, anti + i}, {cdouble(s, 0.0), cdouble(0.0, -s)}, 2};
    }
    if (n % 2) rows[m] = {{m, 0}, {cdouble(1.0, 0.0), cdouble(0.0, 0.0)}, 1};
    return rows;
}

/// Lag sums of Q·P·Q^H for real symmetric P, without forming the product.
inline CVector centro_lag_sums(const RMatrix& p) {
    const Index n = p.rows();
    const auto rows = centro_rows(n);
    CVector out = CVector::Zero(n);
    for (Index a = 0; a < n; ++a) {
        const CentroRow& ra = rows[a];
        for (Index b = a; b < n; ++b) {
            const CentroRow& rb = rows[b];
            cdouble acc = 0.0;
            for (int t = 0; t < ra.count; ++t)
                for (int u = 0; u < rb.count; ++u) acc += ra.coef[t] * p(ra.col[t], rb.col[u]) * std::conj(rb.coef[u]);
            out(b - a) += acc;
        }
    }
    return out;
}

/// Eigendecomposition of a Hermitian Toeplitz matrix through its real form:
/// R = (Q·W)·diag(values)·(Q·W)^H.
struct CentroSpectrum {
    RMatrix basis;  // W, orthonormal columns
    RVector values; // ascending, not clipped

    Index size() const { return values.size(); }
};

inline CentroSpectrum centro_spectrum(const CMatrix& r) {
    Eigen::SelfAdjointEigenSolver<RMatrix> es(centro_real_form(r));
    return {es.eigenvectors(), es.eigenvalues()};
}

/// Same, from the generator of the Toeplitz matrix.
inline CentroSpectrum centro_spectrum_toeplitz(const CVector& r) {
    Eigen::SelfAdjointEigenSolver<RMatrix> es(centro_real_form_toeplitz(r));
    return {es.eigenvectors(), es.eigenvalues()};
}

}  // namespace hetmimo
