#include "colcomplete/polybasis.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "colcomplete/errors.hpp"
#include "colcomplete/svd.hpp"

namespace colcomplete {

PolyBasis build_basis(const std::vector<double>& grid, int degree) {
  if (grid.empty()) throw ArgumentError("polynomial basis needs a non-empty grid");
  if (degree < 0) throw ArgumentError("polynomial degree must be >= 0, got " + std::to_string(degree));
  for (double s : grid)
    if (!std::isfinite(s)) throw ArgumentError("grid contains a non-finite value");
  const auto rows = static_cast<std::size_t>(degree) + 1;
  DenseMatrix s(rows, grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    double power = 1.0;
    for (std::size_t p = 0; p < rows; ++p) {
      s(p, j) = power;
      power *= grid[j];
    }
  }
  return PolyBasis(grid, static_cast<std::size_t>(degree), std::move(s), false);
}

PolyBasis normalize_rows(const PolyBasis& basis) {
  DenseMatrix s = basis.matrix();
  for (std::size_t p = 0; p < s.rows(); ++p) {
    double norm = 0.0;
    for (double v : s.row(p)) norm += v * v;
    norm = std::sqrt(norm);
    if (norm == 0.0) continue;
    for (std::size_t j = 0; j < s.cols(); ++j) s(p, j) /= norm;
  }
  return PolyBasis(basis.grid(), basis.degree(), std::move(s), true);
}

std::vector<double> default_grid(std::size_t m) {
  std::vector<double> grid(m);
  for (std::size_t j = 0; j < m; ++j) grid[j] = 1.0 + 0.01 * static_cast<double>(j + 1);
  return grid;
}

double gram_condition_number(const PolyBasis& basis) {
  const std::vector<double> sigma = singular_values(basis.matrix());
  if (sigma.size() < basis.rows() || sigma.back() == 0.0)
    return std::numeric_limits<double>::infinity();
  const double ratio = sigma.front() / sigma.back();
  return ratio * ratio;
}

}  // namespace colcomplete
