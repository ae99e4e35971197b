#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "efmuon/matrix.hpp"

namespace efmuon {

/// Numerical tolerances shared by the dense kernels. Every function that uses
/// one of these also accepts an explicit override.
namespace tol {
/// Singular values at or below rank_rel * sigma_max are treated as zero.
inline constexpr double rank_rel = 1e-12;
/// Jacobi rotation threshold on |<a_p, a_q>| / (|a_p| |a_q|).
inline constexpr double jacobi_orth = 1e-15;
inline constexpr int jacobi_max_sweeps = 80;
/// Cubic Newton-Schulz iterations used when the caller does not choose.
inline constexpr int newton_schulz_iters = 30;
/// Relative gap below which two singular values count as tied.
inline constexpr double sigma_tie_rel = 1e-12;
}  // namespace tol

/// Reduced SVD A = U diag(sigma) Vt with sigma strictly positive and sorted
/// nonincreasing. U is m x r and Vt is r x n; r may be zero.
struct SvdFactors {
    Matrix U;
    std::vector<double> sigma;
    Matrix Vt;

    std::size_t rank() const noexcept { return sigma.size(); }

    Matrix reconstruct() const {
        Matrix US = U;
        for (std::size_t i = 0; i < US.rows(); ++i)
            for (std::size_t j = 0; j < US.cols(); ++j)
                US(i, j) *= sigma[j];
        return matmul(US, Vt);
    }
};

namespace detail {

// One-sided Jacobi (Hestenes) on the columns of a tall matrix. On return the
// columns of `work` are mutually orthogonal and `V` holds the accumulated
// rotations, so that A = work * V^T.
inline void one_sided_jacobi(Matrix& work, Matrix& V, double orth_tol, int max_sweeps) {
    const std::size_t m = work.rows();
    const std::size_t n = work.cols();
    V = Matrix::identity(n);
    // rounding puts a floor of about m * eps on the attainable cosine, and
    // columns at the noise level of the whole matrix are left alone
    const double eps = std::numeric_limits<double>::epsilon();
    const double cos_tol = std::max(orth_tol, static_cast<double>(m) * eps);
    double fro2 = 0.0;
    for (double x : work.data())
        fro2 += x * x;
    const double negligible = eps * eps * fro2;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double alpha = 0.0, beta = 0.0, gamma = 0.0;
                for (std::size_t i = 0; i < m; ++i) {
                    const double ap = work(i, p);
                    const double aq = work(i, q);
                    alpha += ap * ap;
                    beta += aq * aq;
                    gamma += ap * aq;
                }
                if (gamma == 0.0 || alpha <= negligible || beta <= negligible ||
                    std::abs(gamma) <= cos_tol * std::sqrt(alpha) * std::sqrt(beta))
                    continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t i = 0; i < m; ++i) {
                    const double ap = work(i, p);
                    const double aq = work(i, q);
                    work(i, p) = c * ap - s * aq;
                    work(i, q) = s * ap + c * aq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vp = V(i, p);
                    const double vq = V(i, q);
                    V(i, p) = c * vp - s * vq;
                    V(i, q) = s * vp + c * vq;
                }
            }
        }
        if (!rotated)
            return;
    }
    throw NumericalError("reduced_svd: Jacobi sweeps did not converge after " + std::to_string(max_sweeps) +
                         " sweeps");
}

}  // namespace detail

/// Reduced SVD by one-sided Jacobi. Singular values <= rel_tol * sigma_max are
/// truncated; the zero matrix has rank 0 and empty factors.
inline SvdFactors reduced_svd(const Matrix& A, double rel_tol = tol::rank_rel,
                              int max_sweeps = tol::jacobi_max_sweeps) {
    if (!(rel_tol > 0.0))
        throw std::invalid_argument("reduced_svd: tolerance must be positive");
    if (!A.all_finite())
        throw std::invalid_argument("reduced_svd: non-finite input");

    const bool transposed = A.rows() < A.cols();
    Matrix work = transposed ? A.transpose() : A;
    Matrix V;
    detail::one_sided_jacobi(work, V, tol::jacobi_orth, max_sweeps);

    const std::size_t m = work.rows();
    const std::size_t n = work.cols();
    std::vector<double> norms(n);
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            s += work(i, j) * work(i, j);
        norms[j] = std::sqrt(s);
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return norms[a] > norms[b]; });

    const double smax = n == 0 ? 0.0 : norms[order.front()];
    std::vector<std::size_t> keep;
    for (std::size_t j : order)
        if (norms[j] > 0.0 && norms[j] > rel_tol * smax)
            keep.push_back(j);

    const std::size_t r = keep.size();
    Matrix left(m, r);   // normalized columns of work
    Matrix right(n, r);  // matching columns of V
    std::vector<double> sigma(r);
    for (std::size_t k = 0; k < r; ++k) {
        const std::size_t j = keep[k];
        sigma[k] = norms[j];
        for (std::size_t i = 0; i < m; ++i)
            left(i, k) = work(i, j) / norms[j];
        for (std::size_t i = 0; i < n; ++i)
            right(i, k) = V(i, j);
    }

    if (transposed)
        return SvdFactors{std::move(right), std::move(sigma), left.transpose()};
    return SvdFactors{std::move(left), std::move(sigma), right.transpose()};
}

/// Polar factor U V^T of the reduced SVD; null directions map to zero.
inline Matrix polar_from_svd(const SvdFactors& f, std::size_t rows, std::size_t cols) {
    if (f.rank() == 0)
        return Matrix(rows, cols);
    return matmul(f.U, f.Vt);
}

inline Matrix polar_exact(const Matrix& A, double rel_tol = tol::rank_rel) {
    return polar_from_svd(reduced_svd(A, rel_tol), A.rows(), A.cols());
}

struct PolarApprox {
    Matrix value;
    bool zero_input = false;
};

/// Cubic Newton-Schulz iteration X <- 1.5 X - 0.5 X X^T X started from
/// A / min(|A|_F, sqrt(|A|_1 |A|_inf)), which places every singular value in
/// (0, 1] and leaves inputs with sigma_max = 1 such as the identity fixed.
inline PolarApprox polar_newton_schulz(const Matrix& A, int iters = tol::newton_schulz_iters) {
    if (iters <= 0)
        throw std::invalid_argument("polar_newton_schulz: iters must be positive");
    if (!A.all_finite())
        throw std::invalid_argument("polar_newton_schulz: non-finite input");
    const double fro = frobenius(A);
    if (fro == 0.0)
        return {Matrix(A.rows(), A.cols()), true};

    std::vector<double> col_sum(A.cols(), 0.0);
    double max_row = 0.0;
    for (std::size_t i = 0; i < A.rows(); ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < A.cols(); ++j) {
            row += std::abs(A(i, j));
            col_sum[j] += std::abs(A(i, j));
        }
        max_row = std::max(max_row, row);
    }
    const double max_col = *std::max_element(col_sum.begin(), col_sum.end());
    const double scale = std::min(fro, std::sqrt(max_col * max_row));

    const bool transposed = A.rows() < A.cols();
    Matrix X = (transposed ? A.transpose() : A) * (1.0 / scale);
    const double bound = 2.0 * std::sqrt(static_cast<double>(X.cols()));
    for (int k = 0; k < iters; ++k) {
        const Matrix gram = matmul(X.transpose(), X);
        X = 1.5 * X - 0.5 * matmul(X, gram);
        const double growth = frobenius(X);
        if (!std::isfinite(growth) || growth > bound)
            throw NumericalError("polar_newton_schulz: iteration diverged at step " + std::to_string(k));
    }
    return {transposed ? X.transpose() : std::move(X), false};
}

inline Matrix polar_newton_schulz_or_zero(const Matrix& A, int iters) {
    return polar_newton_schulz(A, iters).value;
}

/// Entrywise sign with sign(0) = 0.
inline Matrix sign_elementwise(const Matrix& A) {
    Matrix S(A.rows(), A.cols());
    for (std::size_t k = 0; k < A.size(); ++k)
        S[k] = A[k] > 0.0 ? 1.0 : (A[k] < 0.0 ? -1.0 : 0.0);
    return S;
}

inline double sign(double x) noexcept { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

/// Scalar norms. Vector norms (L1, L2, Linf, Lp) require a row or column
/// matrix; Frobenius, Operator and Nuclear accept any shape.
struct NormKind {
    enum class Tag { L1, L2, Linf, Lp, Frobenius, Operator, Nuclear };
    Tag tag = Tag::Frobenius;
    double p = 2.0;

    static NormKind l1() { return {Tag::L1, 1.0}; }
    static NormKind l2() { return {Tag::L2, 2.0}; }
    static NormKind linf() { return {Tag::Linf, 0.0}; }
    static NormKind lp(double p) { return {Tag::Lp, p}; }
    static NormKind frobenius() { return {Tag::Frobenius, 2.0}; }
    static NormKind op() { return {Tag::Operator, 0.0}; }
    static NormKind nuclear() { return {Tag::Nuclear, 0.0}; }
};

namespace detail {

inline double lp_entries(const std::vector<double>& v, double p) {
    if (p == 1.0) {
        double s = 0.0;
        for (double x : v)
            s += std::abs(x);
        return s;
    }
    if (p == 2.0) {
        double s = 0.0;
        for (double x : v)
            s += x * x;
        return std::sqrt(s);
    }
    // Scale by the max entry so that |x|^p neither overflows nor underflows.
    double mx = 0.0;
    for (double x : v)
        mx = std::max(mx, std::abs(x));
    if (mx == 0.0)
        return 0.0;
    double s = 0.0;
    for (double x : v)
        s += std::pow(std::abs(x) / mx, p);
    return mx * std::pow(s, 1.0 / p);
}

inline double linf_entries(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v)
        m = std::max(m, std::abs(x));
    return m;
}

}  // namespace detail

inline double norm(const Matrix& A, NormKind kind) {
    using Tag = NormKind::Tag;
    switch (kind.tag) {
    case Tag::L1:
    case Tag::L2:
    case Tag::Linf:
    case Tag::Lp:
        if (kind.tag == Tag::Lp && !(kind.p >= 1.0 && std::isfinite(kind.p)))
            throw std::invalid_argument("norm: Lp requires p in [1, inf)");
        if (!A.is_vector())
            throw std::invalid_argument("norm: vector norm applied to a " + std::to_string(A.rows()) + "x" +
                                        std::to_string(A.cols()) + " matrix");
        if (kind.tag == Tag::Linf)
            return detail::linf_entries(A.data());
        return detail::lp_entries(A.data(), kind.tag == Tag::L1 ? 1.0 : (kind.tag == Tag::L2 ? 2.0 : kind.p));
    case Tag::Frobenius:
        return frobenius(A);
    case Tag::Operator: {
        const auto f = reduced_svd(A);
        return f.rank() == 0 ? 0.0 : f.sigma.front();
    }
    case Tag::Nuclear: {
        const auto f = reduced_svd(A);
        double s = 0.0;
        for (double v : f.sigma)
            s += v;
        return s;
    }
    }
    throw std::invalid_argument("norm: unknown kind");
}


enum class PolarBackend { Exact, NewtonSchulz };

struct PolarOptions {
    PolarBackend backend = PolarBackend::Exact;
    int ns_iters = tol::newton_schulz_iters;
};

/// Polar factor together with the nuclear norm, from a single factorization.
struct PolarNuclear {
    Matrix polar;
    double nuclear = 0.0;
};

/// With the exact backend the nuclear norm is the singular-value sum; with
/// Newton-Schulz it is the pairing <A, polar(A)>, which equals |A|_nuc when the
/// polar factor is exact.
inline PolarNuclear polar_with_nuclear(const Matrix& A, const PolarOptions& opts = {}) {
    if (opts.backend == PolarBackend::Exact) {
        const auto f = reduced_svd(A);
        double nuc = 0.0;
        for (double s : f.sigma)
            nuc += s;
        return {polar_from_svd(f, A.rows(), A.cols()), nuc};
    }
    auto approx = polar_newton_schulz_or_zero(A, opts.ns_iters);
    const double nuc = inner(A, approx);
    return {std::move(approx), nuc};
}

inline Matrix polar(const Matrix& A, const PolarOptions& opts = {}) {
    if (opts.backend == PolarBackend::Exact)
        return polar_exact(A);
    return polar_newton_schulz_or_zero(A, opts.ns_iters);
}

}  // namespace efmuon
