#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace colcomplete {

// Row-major dense real matrix. Both dimensions are positive and every entry
// is finite when it leaves a constructor.
class DenseMatrix {
 public:
  DenseMatrix(std::size_t rows, std::size_t cols);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static DenseMatrix identity(std::size_t n);
  static DenseMatrix diagonal(std::span<const double> values);
  // Column vector (n x 1).
  static DenseMatrix column(std::span<const double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }

  DenseMatrix transpose() const;
  // Columns [first, first + count).
  DenseMatrix columns(std::size_t first, std::size_t count) const;
  DenseMatrix gather_columns(std::span<const std::size_t> indices) const;
  DenseMatrix gather_rows(std::span<const std::size_t> indices) const;

  bool operator==(const DenseMatrix& other) const = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator*(double s, const DenseMatrix& a);

// a^T b without forming the transpose.
DenseMatrix multiply_at_b(const DenseMatrix& a, const DenseMatrix& b);
// a b^T without forming the transpose.
DenseMatrix multiply_a_bt(const DenseMatrix& a, const DenseMatrix& b);

double frobenius_norm(const DenseMatrix& a);
double frobenius_norm_squared(const DenseMatrix& a);
double spectral_norm(const DenseMatrix& a);
double max_abs(const DenseMatrix& a);
double trace(const DenseMatrix& a);
// Frobenius inner product sum_ij a_ij b_ij.
double inner(const DenseMatrix& a, const DenseMatrix& b);

// max_ij |(q^T q - I)_ij|.
double orthonormality_deviation(const DenseMatrix& q);

// P = basis basis^T for a basis with orthonormal columns (checked to tol_orth).
DenseMatrix projector(const DenseMatrix& basis);

// Orthonormal basis of the column span via twice-iterated modified Gram-Schmidt.
// Throws RankError when a column is numerically dependent on the previous ones.
DenseMatrix orthonormalize(const DenseMatrix& a);

inline constexpr double kTolOrth = 1e-10;

}  // namespace colcomplete
