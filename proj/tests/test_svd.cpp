#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "colcomplete/errors.hpp"
#include "colcomplete/svd.hpp"
#include "test_support.hpp"

namespace colcomplete {
namespace {

void expect_valid_factors(const DenseMatrix& a, const SvdFactors& f) {
  const std::size_t p = std::min(a.rows(), a.cols());
  ASSERT_EQ(f.sigma.size(), p);
  ASSERT_EQ(f.u.rows(), a.rows());
  ASSERT_EQ(f.u.cols(), p);
  ASSERT_EQ(f.vt.rows(), p);
  ASSERT_EQ(f.vt.cols(), a.cols());
  for (std::size_t k = 0; k < p; ++k) {
    EXPECT_GE(f.sigma[k], 0.0);
    if (k > 0) {
      EXPECT_LE(f.sigma[k], f.sigma[k - 1]);
    }
  }
  EXPECT_LE(orthonormality_deviation(f.u), kTolOrth);
  EXPECT_LE(orthonormality_deviation(f.vt.transpose()), kTolOrth);
  EXPECT_LE(frobenius_norm(a - f.reconstruct()), 1e-8 * std::max(frobenius_norm(a), 1e-300));
}

double projector_distance(const DenseMatrix& a, const DenseMatrix& b) {
  return frobenius_norm(projector(a) - projector(b));
}

TEST(SvdFull, Identity) {
  const SvdFactors f = svd_full(DenseMatrix::identity(3));
  EXPECT_EQ(f.sigma, (std::vector<double>{1, 1, 1}));
  EXPECT_EQ(f.u, DenseMatrix::identity(3));
  EXPECT_EQ(f.vt, DenseMatrix::identity(3));
}

TEST(SvdFull, DiagonalSingularValues) {
  const std::vector<double> d{3, 2, 1};
  const SvdFactors f = svd_full(DenseMatrix::diagonal(d));
  ASSERT_EQ(f.sigma.size(), 3u);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(f.sigma[k], d[k], 1e-15);
}

TEST(SvdFull, MatchesJacobiReferenceOnSeed42) {
  Rng rng(42);
  const DenseMatrix a = rng.gaussian_matrix(5, 4);
  const SvdFactors gk = svd_full(a);
  const SvdFactors jac = svd_jacobi(a);
  expect_valid_factors(a, gk);
  expect_valid_factors(a, jac);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(gk.sigma[k], jac.sigma[k], 1e-10);
}

TEST(SvdFull, FactorInvariantsOverRandomShapes) {
  Rng rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t rows = 1 + rng.below(12);
    const std::size_t cols = 1 + rng.below(12);
    const DenseMatrix a = rng.gaussian_matrix(rows, cols, 1.0 + 10.0 * rng.uniform());
    const SvdFactors gk = svd_full(a);
    expect_valid_factors(a, gk);
    const SvdFactors jac = svd_jacobi(a);
    expect_valid_factors(a, jac);
    for (std::size_t k = 0; k < gk.sigma.size(); ++k)
      EXPECT_NEAR(gk.sigma[k], jac.sigma[k], 1e-10 * gk.sigma[0]);
  }
}

TEST(SvdFull, RankDeficientInputKeepsOrthonormalFactors) {
  Rng rng(5);
  const DenseMatrix a = rng.gaussian_matrix(7, 2) * rng.gaussian_matrix(2, 5);
  for (const SvdFactors& f : {svd_full(a), svd_jacobi(a)}) {
    expect_valid_factors(a, f);
    EXPECT_GT(f.sigma[1], 1e-3);
    for (std::size_t k = 2; k < f.sigma.size(); ++k) EXPECT_LT(f.sigma[k], 1e-12 * f.sigma[0]);
  }
  const SvdFactors zero = svd_full(DenseMatrix(3, 3));
  EXPECT_EQ(zero.sigma, (std::vector<double>{0, 0, 0}));
  expect_valid_factors(DenseMatrix(3, 3), zero);
}

TEST(SvdFull, RepeatedAndGradedSpectra) {
  // Orthogonal similarity of diag values; exercises ties and wide dynamic range.
  Rng rng(77);
  const DenseMatrix u = testing::random_orthonormal(6, 6, rng);
  const DenseMatrix v = testing::random_orthonormal(6, 6, rng);
  const std::vector<double> spectrum{5, 5, 1, 1e-4, 1e-8, 0};
  const DenseMatrix a = u * DenseMatrix::diagonal(spectrum) * v.transpose();
  const SvdFactors f = svd_full(a);
  expect_valid_factors(a, f);
  for (std::size_t k = 0; k < 6; ++k) EXPECT_NEAR(f.sigma[k], spectrum[k], 1e-12 * 5);
}

TEST(SvdTruncated, TopOfDiagonal) {
  const std::vector<double> d{3, 2, 1};
  const SvdFactors f = svd_truncated(DenseMatrix::diagonal(d), 2);
  ASSERT_EQ(f.sigma.size(), 2u);
  EXPECT_NEAR(f.sigma[0], 3, 1e-15);
  EXPECT_NEAR(f.sigma[1], 2, 1e-15);
  EXPECT_EQ(f.u.cols(), 2u);
}

TEST(SvdTruncated, ExactRankOne) {
  const DenseMatrix u{{1}, {-2}, {0.5}};
  const DenseMatrix v{{3}, {1}, {4}, {-1}};
  const DenseMatrix a = multiply_a_bt(u, v);
  const SvdFactors f = svd_truncated(a, 1);
  EXPECT_LE(max_abs(a - f.reconstruct()), 1e-12);
}

TEST(SvdTruncated, EckartYoungOnSeed7) {
  Rng rng(7);
  const DenseMatrix a = rng.gaussian_matrix(6, 6);
  const SvdFactors full = svd_full(a);
  const SvdFactors top = svd_truncated(a, 3);
  EXPECT_NEAR(spectral_norm(a - top.reconstruct()), full.sigma[3], 1e-9);
}

TEST(SvdTruncated, RankOutOfRange) {
  const DenseMatrix a(3, 2);
  EXPECT_THROW(svd_truncated(a, 0), RankError);
  EXPECT_THROW(svd_truncated(a, 3), RankError);
}

TEST(SvdTruncated, EckartYoungAndSubspaceProperties) {
  Rng rng(31337);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t rows = 2 + rng.below(9);
    const std::size_t cols = 2 + rng.below(9);
    const std::size_t p = std::min(rows, cols);
    const std::size_t r = 1 + rng.below(p);
    DenseMatrix a = rng.gaussian_matrix(rows, cols);
    if (trial % 4 == 0 && r < p) {
      // exact rank r
      a = rng.gaussian_matrix(rows, r) * rng.gaussian_matrix(r, cols);
    }
    const SvdFactors full = svd_full(a);
    const SvdFactors top = svd_truncated(a, r);
    const double expected = r < p ? full.sigma[r] : 0.0;
    EXPECT_NEAR(spectral_norm(a - top.reconstruct()), expected, 1e-9 * full.sigma[0]);
    if (r < p && full.sigma[r - 1] - full.sigma[r] > 1e-8) {
      EXPECT_LT(projector_distance(top.u, full.u.columns(0, r)), 1e-7);
    }
  }
}

TEST(SymmetricEigenvalues, KnownSpectrum) {
  Rng rng(9);
  const DenseMatrix q = testing::random_orthonormal(5, 5, rng);
  const std::vector<double> lambda{-2, 0, 0.5, 3, 7};
  const DenseMatrix a = q * DenseMatrix::diagonal(lambda) * q.transpose();
  DenseMatrix sym = a;
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < i; ++j) sym(i, j) = sym(j, i);
  const std::vector<double> eig = symmetric_eigenvalues(sym);
  for (std::size_t k = 0; k < 5; ++k) EXPECT_NEAR(eig[k], lambda[k], 1e-12);
  EXPECT_THROW(symmetric_eigenvalues(DenseMatrix{{1, 2}, {0, 1}}), ArgumentError);
}

}  // namespace
}  // namespace colcomplete
