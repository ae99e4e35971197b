#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "efmuon/linalg.hpp"
#include "efmuon/random.hpp"

using namespace efmuon;

namespace {

Matrix gram(const Matrix& a) { return matmul(a.transpose(), a); }

double orth_defect_cols(const Matrix& U) {
    const Matrix g = gram(U);
    return frobenius(g - Matrix::identity(g.rows()));
}

// Closed-form polar factor of a nonsingular 2x2 matrix:
// (A + sgn(det A) cof(A)) / sqrt(|A|_F^2 + 2 |det A|).
Matrix polar2x2(const Matrix& A) {
    const double a = A(0, 0), b = A(0, 1), c = A(1, 0), d = A(1, 1);
    const double det = a * d - b * c;
    const double s = det > 0 ? 1.0 : -1.0;
    const double scale = std::sqrt(a * a + b * b + c * c + d * d + 2.0 * std::abs(det));
    return Matrix{{(a + s * d) / scale, (b - s * c) / scale}, {(c - s * b) / scale, (d + s * a) / scale}};
}

Matrix inverse3x3(const Matrix& m) {
    const double det = m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
                       m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
                       m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
    Matrix inv(3, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const int r0 = (j + 1) % 3, r1 = (j + 2) % 3, c0 = (i + 1) % 3, c1 = (i + 2) % 3;
            inv(i, j) = (m(r0, c0) * m(r1, c1) - m(r0, c1) * m(r1, c0)) / det;
        }
    return inv;
}

// Classical Newton polar iteration X <- (X + X^{-T}) / 2 for square nonsingular input.
Matrix newton_polar3x3(const Matrix& A) {
    Matrix X = A;
    for (int k = 0; k < 60; ++k)
        X = 0.5 * (X + inverse3x3(X).transpose());
    return X;
}

}  // namespace

TEST(Matrix, RejectsNonFiniteAndBadSizes) {
    EXPECT_THROW(Matrix(2, 2, {1.0, 2.0, 3.0}), std::invalid_argument);
    EXPECT_THROW(Matrix(1, 2, {1.0, NAN}), std::invalid_argument);
    EXPECT_THROW(Matrix(1, 1, {INFINITY}), std::invalid_argument);
    EXPECT_NO_THROW(Matrix(0, 3));
}

TEST(ReducedSvd, DiagonalSingularValuesAreAbsoluteEntries) {
    const auto f = reduced_svd(Matrix{{3, 0}, {0, -4}});
    ASSERT_EQ(f.rank(), 2u);
    EXPECT_DOUBLE_EQ(f.sigma[0], 4.0);
    EXPECT_DOUBLE_EQ(f.sigma[1], 3.0);
}

TEST(ReducedSvd, ZeroMatrixHasRankZero) {
    const auto f = reduced_svd(Matrix(2, 3));
    EXPECT_EQ(f.rank(), 0u);
    EXPECT_EQ(f.U.cols(), 0u);
    EXPECT_EQ(f.Vt.rows(), 0u);
}

TEST(ReducedSvd, RankOneAgainstEigenOfGram) {
    const Matrix A{{3, 0}, {4, 0}};
    // A^T A = diag(25, 0): eigenvalue 25 with eigenvector (1, 0).
    const Matrix g = gram(A);
    ASSERT_DOUBLE_EQ(g(0, 0), 25.0);
    const auto f = reduced_svd(A);
    ASSERT_EQ(f.rank(), 1u);
    EXPECT_NEAR(f.sigma[0], std::sqrt(g(0, 0)), 1e-15);
    const double s = f.Vt(0, 0) > 0 ? 1.0 : -1.0;  // joint sign of (u, v)
    EXPECT_NEAR(s * f.Vt(0, 0), 1.0, 1e-15);
    EXPECT_NEAR(s * f.Vt(0, 1), 0.0, 1e-15);
    EXPECT_NEAR(s * f.U(0, 0), 0.6, 1e-15);
    EXPECT_NEAR(s * f.U(1, 0), 0.8, 1e-15);
    EXPECT_LE(max_abs_diff(f.reconstruct(), A), 1e-14);
}

TEST(ReducedSvd, RandomInvariants) {
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t m = uniform_index(rng, 1, 9), n = uniform_index(rng, 1, 9);
        Matrix A = gaussian_matrix(rng, m, n, std::pow(10.0, uniform(rng, -3, 3)));
        if (trial % 3 == 0 && m > 1)  // force rank deficiency
            for (std::size_t j = 0; j < n; ++j)
                A(m - 1, j) = 2.0 * A(0, j);
        const auto f = reduced_svd(A);
        EXPECT_LE(orth_defect_cols(f.U), 1e-10);
        EXPECT_LE(orth_defect_cols(f.Vt.transpose()), 1e-10);
        for (std::size_t k = 0; k < f.rank(); ++k) {
            EXPECT_GT(f.sigma[k], 0.0);
            if (k > 0) {
                EXPECT_LE(f.sigma[k], f.sigma[k - 1]);
            }
        }
        EXPECT_LE(frobenius(f.reconstruct() - A), 1e-8 * std::max(1.0, frobenius(A)));
    }
}

TEST(ReducedSvd, BoundedSweepsRaiseNumericalError) {
    Rng rng(3);
    const Matrix A = gaussian_matrix(rng, 6, 6);
    EXPECT_THROW(reduced_svd(A, tol::rank_rel, 1), NumericalError);
}

TEST(ReducedSvd, RejectsBadTolerance) { EXPECT_THROW(reduced_svd(Matrix{{1}}, 0.0), std::invalid_argument); }

TEST(PolarExact, DiagonalIsSign) {
    const Matrix D = Matrix::diagonal(3, 3, {2, -3, 0});
    EXPECT_EQ(polar_exact(D), Matrix::diagonal(3, 3, {1, -1, 0}));
}

TEST(PolarExact, ZeroAndRotation) {
    EXPECT_EQ(polar_exact(Matrix(2, 2)), Matrix(2, 2));
    const Matrix R{{0, -1}, {1, 0}};
    EXPECT_LE(max_abs_diff(polar_exact(R), R), 1e-15);
}

TEST(PolarExact, RandomDiagonalsIncludingZerosAreExactSigns) {
    Rng rng(5);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t m = uniform_index(rng, 1, 7), n = uniform_index(rng, 1, 7);
        std::vector<double> d(std::min(m, n));
        for (double& x : d)
            x = uniform(rng, 0, 1) < 0.3 ? 0.0 : uniform(rng, -5, 5);
        const Matrix D = Matrix::diagonal(m, n, d);
        EXPECT_EQ(polar_exact(D), sign_elementwise(D));
    }
}

TEST(PolarExact, MatchesClosedForm2x2) {
    Rng rng(6);
    for (int trial = 0; trial < 200; ++trial) {
        const Matrix A = gaussian_matrix(rng, 2, 2);
        EXPECT_LE(max_abs_diff(polar_exact(A), polar2x2(A)), 1e-12);
    }
}

TEST(PolarExact, MatchesInverseNewtonIteration3x3) {
    Rng rng(8);
    for (int trial = 0; trial < 100; ++trial) {
        const Matrix A = conditioned_matrix(rng, 3, 3, 0.5, 5.0);
        EXPECT_LE(max_abs_diff(polar_exact(A), newton_polar3x3(A)), 1e-11);
    }
}

TEST(PolarExact, DualityAndRankProperties) {
    Rng rng(9);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t m = uniform_index(rng, 1, 7), n = uniform_index(rng, 1, 7);
        Matrix A = gaussian_matrix(rng, m, n);
        if (trial % 2 == 0 && n > 1)
            for (std::size_t i = 0; i < m; ++i)
                A(i, n - 1) = -A(i, 0);
        const auto f = reduced_svd(A);
        const Matrix P = polar_exact(A);
        EXPECT_LE(norm(P, NormKind::op()), 1.0 + 1e-10);
        EXPECT_NEAR(inner(A, P), norm(A, NormKind::nuclear()), 1e-8);
        EXPECT_NEAR(frobenius(P) * frobenius(P), static_cast<double>(f.rank()), 1e-8);
    }
}

TEST(PolarNewtonSchulz, FixedPointAndDiagonal) {
    const auto id = polar_newton_schulz(Matrix::identity(2), 3);
    EXPECT_FALSE(id.zero_input);
    EXPECT_LE(max_abs_diff(id.value, Matrix::identity(2)), 1e-15);
    const auto d = polar_newton_schulz(Matrix{{3, 0}, {0, -4}});
    EXPECT_LE(max_abs_diff(d.value, Matrix{{1, 0}, {0, -1}}), 1e-4);
}

TEST(PolarNewtonSchulz, ZeroInputIsFlagged) {
    const auto z = polar_newton_schulz(Matrix(3, 2));
    EXPECT_TRUE(z.zero_input);
    EXPECT_EQ(z.value, Matrix(3, 2));
}

TEST(PolarNewtonSchulz, Random8x5WellConditioned) {
    Rng rng(10);
    for (int trial = 0; trial < 50; ++trial) {
        const Matrix A = conditioned_matrix(rng, 8, 5, 1.0, 10.0);
        EXPECT_LE(frobenius(polar_newton_schulz(A).value - polar_exact(A)), 1e-4);
    }
}

TEST(PolarNewtonSchulz, ConditionNumberThousandAtDefaultIterations) {
    Rng rng(12);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix A = conditioned_matrix(rng, 4, 4, 1.0, 1000.0);
        const auto f = reduced_svd(A);
        ASSERT_LE(f.sigma.front() / f.sigma.back(), 1000.0);
        EXPECT_LE(frobenius(polar_newton_schulz(A).value - polar_exact(A)), 1e-4);
    }
}

TEST(Sign, ElementwiseWithZero) {
    EXPECT_EQ(sign_elementwise(Matrix{{0.5, -0.5}, {0, 7}}), (Matrix{{1, -1}, {0, 1}}));
    EXPECT_EQ(sign_elementwise(Matrix(2, 2)), Matrix(2, 2));
    EXPECT_EQ(sign(0.0), 0.0);
    EXPECT_EQ(sign(-0.0), 0.0);
}

TEST(Norm, DiagonalIdentityAndVector) {
    const Matrix D{{3, 0}, {0, -4}};
    EXPECT_DOUBLE_EQ(norm(D, NormKind::op()), 4.0);
    EXPECT_DOUBLE_EQ(norm(D, NormKind::nuclear()), 7.0);
    EXPECT_DOUBLE_EQ(norm(D, NormKind::frobenius()), 5.0);
    const Matrix I = Matrix::identity(5);
    EXPECT_DOUBLE_EQ(norm(I, NormKind::nuclear()), 5.0);
    EXPECT_DOUBLE_EQ(norm(I, NormKind::op()), 1.0);
    EXPECT_DOUBLE_EQ(norm(I, NormKind::frobenius()), std::sqrt(5.0));
    const Matrix v = Matrix::column({2, 0, -1});
    EXPECT_DOUBLE_EQ(norm(v, NormKind::l1()), 3.0);
    EXPECT_DOUBLE_EQ(norm(v, NormKind::linf()), 2.0);
    EXPECT_DOUBLE_EQ(norm(v, NormKind::l2()), std::sqrt(5.0));
    EXPECT_NEAR(norm(v.transpose(), NormKind::lp(3.0)), std::cbrt(9.0), 1e-15);
}

TEST(Norm, RejectsInvalidKinds) {
    EXPECT_THROW(norm(Matrix::column({1, 2}), NormKind::lp(0.5)), std::invalid_argument);
    EXPECT_THROW(norm(Matrix(2, 2), NormKind::l1()), std::invalid_argument);
}

TEST(Norm, Equivalences) {
    Rng rng(13);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t m = uniform_index(rng, 1, 8), n = uniform_index(rng, 1, 8);
        const Matrix A = gaussian_matrix(rng, m, n);
        const double op = norm(A, NormKind::op()), fro = frobenius(A), nuc = norm(A, NormKind::nuclear());
        const double r = static_cast<double>(std::min(m, n));
        EXPECT_LE(fro / std::sqrt(r), op * (1 + 1e-12));
        EXPECT_LE(op, fro * (1 + 1e-12));
        EXPECT_LE(fro, nuc * (1 + 1e-12));
    }
}

TEST(Polar, BackendSelection) {
    Rng rng(14);
    const Matrix A = conditioned_matrix(rng, 5, 3, 1.0, 4.0);
    PolarOptions ns;
    ns.backend = PolarBackend::NewtonSchulz;
    EXPECT_LE(max_abs_diff(polar(A, ns), polar(A)), 1e-4);
    const auto pn = polar_with_nuclear(A);
    EXPECT_NEAR(pn.nuclear, norm(A, NormKind::nuclear()), 1e-12);
}
