#pragma once

#include <cstddef>
#include <vector>

#include "colcomplete/matrix.hpp"

namespace colcomplete {

// Side-information matrix with row p holding grid[j]^p for p = 0..degree.
// A degree-l basis therefore has l + 1 rows.
class PolyBasis {
 public:
  const std::vector<double>& grid() const noexcept { return grid_; }
  std::size_t degree() const noexcept { return degree_; }
  const DenseMatrix& matrix() const noexcept { return matrix_; }
  std::size_t rows() const noexcept { return matrix_.rows(); }
  std::size_t cols() const noexcept { return matrix_.cols(); }
  bool normalized() const noexcept { return normalized_; }

 private:
  friend PolyBasis build_basis(const std::vector<double>& grid, int degree);
  friend PolyBasis normalize_rows(const PolyBasis& basis);
  PolyBasis(std::vector<double> grid, std::size_t degree, DenseMatrix matrix, bool normalized)
      : grid_(std::move(grid)), degree_(degree), matrix_(std::move(matrix)), normalized_(normalized) {}

  std::vector<double> grid_;
  std::size_t degree_;
  DenseMatrix matrix_;
  bool normalized_;
};

// Throws ArgumentError for an empty grid, a negative degree or non-finite values.
PolyBasis build_basis(const std::vector<double>& grid, int degree);

// Rescales every row to unit Euclidean norm. Spans the same row space.
PolyBasis normalize_rows(const PolyBasis& basis);

// [1.01, 1.02, ..., 1 + 0.01 m].
std::vector<double> default_grid(std::size_t m);

// Condition number of S S^T, i.e. (sigma_max / sigma_min)^2 of S; infinity
// when S is row-rank deficient.
double gram_condition_number(const PolyBasis& basis);

}  // namespace colcomplete
