#include <gtest/gtest.h>

#include <cmath>

#include "colcomplete/errors.hpp"
#include "colcomplete/polybasis.hpp"
#include "colcomplete/svd.hpp"

namespace colcomplete {
namespace {

TEST(PolyBasis, SmallVandermonde) {
  const PolyBasis b = build_basis({1, 2, 3}, 2);
  EXPECT_EQ(b.matrix(), (DenseMatrix{{1, 1, 1}, {1, 2, 3}, {1, 4, 9}}));
  EXPECT_EQ(b.rows(), 3u);
  EXPECT_EQ(b.degree(), 2u);
}

TEST(PolyBasis, DegreeZeroIsOnes) {
  const PolyBasis b = build_basis({0.5, -2, 7}, 0);
  EXPECT_EQ(b.matrix(), (DenseMatrix{{1, 1, 1}}));
}

TEST(PolyBasis, RejectsBadInput) {
  EXPECT_THROW(build_basis({}, 1), ArgumentError);
  EXPECT_THROW(build_basis({1, 2}, -1), ArgumentError);
  EXPECT_THROW(build_basis({1, NAN}, 1), ArgumentError);
}

TEST(DefaultGrid, Values) {
  const auto g3 = default_grid(3);
  ASSERT_EQ(g3.size(), 3u);
  EXPECT_DOUBLE_EQ(g3[0], 1.01);
  EXPECT_DOUBLE_EQ(g3[1], 1.02);
  EXPECT_DOUBLE_EQ(g3[2], 1.03);
  EXPECT_EQ(default_grid(1), std::vector<double>{1.01});
  const auto g100 = default_grid(100);
  EXPECT_NEAR(g100.back(), 2.0, 1e-12);
  for (std::size_t j = 1; j < g100.size(); ++j) EXPECT_LT(g100[j - 1], g100[j]);
}

TEST(PolyBasis, FullRowRankOnDistinctGrid) {
  const PolyBasis b = build_basis(default_grid(20), 4);
  const auto sigma = singular_values(b.matrix());
  ASSERT_EQ(sigma.size(), 5u);
  EXPECT_GT(sigma.back(), 0.0);
}

TEST(PolyBasis, ScalingMultipliesRowsByPowers) {
  const std::vector<double> grid{0.5, 1.25, 2.0, 3.5};
  std::vector<double> scaled = grid;
  for (double& s : scaled) s *= 3.0;
  const DenseMatrix a = build_basis(grid, 3).matrix();
  const DenseMatrix b = build_basis(scaled, 3).matrix();
  for (std::size_t p = 0; p < 4; ++p)
    for (std::size_t j = 0; j < grid.size(); ++j)
      EXPECT_NEAR(b(p, j), std::pow(3.0, static_cast<double>(p)) * a(p, j), 1e-12 * std::abs(b(p, j)));
}

TEST(PolyBasis, DefaultGridConditionIsFinite) {
  const double kappa = gram_condition_number(build_basis(default_grid(100), 5));
  EXPECT_TRUE(std::isfinite(kappa));
  EXPECT_GT(kappa, 1.0);
  RecordProperty("gram_condition", std::to_string(kappa));
}

TEST(PolyBasis, NormalizedRowsHaveUnitNorm) {
  const PolyBasis b = normalize_rows(build_basis(default_grid(10), 3));
  EXPECT_TRUE(b.normalized());
  for (std::size_t p = 0; p < b.rows(); ++p) {
    double s = 0.0;
    for (double v : b.matrix().row(p)) s += v * v;
    EXPECT_NEAR(s, 1.0, 1e-14);
  }
}

}  // namespace
}  // namespace colcomplete
