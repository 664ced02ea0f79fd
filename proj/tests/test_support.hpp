#pragma once

// Test-only oracles. Nothing here calls the SVD or solver code under test.

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "colcomplete/matrix.hpp"
#include "colcomplete/rng.hpp"

namespace colcomplete::testing {

// Solves a x = b for square a by Gaussian elimination with partial pivoting.
// b may hold several right-hand sides as columns.
inline DenseMatrix solve_linear(DenseMatrix a, DenseMatrix b) {
  const std::size_t n = a.rows();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t i = col + 1; i < n; ++i)
      if (std::abs(a(i, col)) > std::abs(a(piv, col))) piv = i;
    if (a(piv, col) == 0.0) throw std::runtime_error("singular system");
    for (std::size_t j = 0; j < n; ++j) std::swap(a(col, j), a(piv, j));
    for (std::size_t j = 0; j < b.cols(); ++j) std::swap(b(col, j), b(piv, j));
    for (std::size_t i = col + 1; i < n; ++i) {
      const double f = a(i, col) / a(col, col);
      for (std::size_t j = col; j < n; ++j) a(i, j) -= f * a(col, j);
      for (std::size_t j = 0; j < b.cols(); ++j) b(i, j) -= f * b(col, j);
    }
  }
  DenseMatrix x(n, b.cols());
  for (std::size_t j = 0; j < b.cols(); ++j) {
    for (std::size_t i = n; i-- > 0;) {
      double s = b(i, j);
      for (std::size_t k = i + 1; k < n; ++k) s -= a(i, k) * x(k, j);
      x(i, j) = s / a(i, i);
    }
  }
  return x;
}

// Right pseudo-inverse b^T (b b^T)^{-1} of a full-row-rank b.
inline DenseMatrix right_pinv(const DenseMatrix& b) {
  const DenseMatrix gram = multiply_a_bt(b, b);
  return solve_linear(gram, b).transpose();
}

// Least-squares q minimizing ||a - q s||_F via the normal equations.
inline DenseMatrix normal_equations_fit(const DenseMatrix& a, const DenseMatrix& s) {
  return a * right_pinv(s);
}

// Central finite-difference gradient of a scalar function of a matrix.
inline DenseMatrix fd_gradient(const std::function<double(const DenseMatrix&)>& f,
                               const DenseMatrix& x, double h) {
  DenseMatrix g(x.rows(), x.cols());
  DenseMatrix probe = x;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double orig = probe.data()[k];
    probe.data()[k] = orig + h;
    const double fp = f(probe);
    probe.data()[k] = orig - h;
    const double fm = f(probe);
    probe.data()[k] = orig;
    g.data()[k] = (fp - fm) / (2.0 * h);
  }
  return g;
}

// Largest entrywise relative error, with the denominator floored at
// 1e-3 * max|reference| so that near-zero entries are compared on scale.
inline double max_relative_error(const DenseMatrix& approx, const DenseMatrix& reference) {
  const double floor = 1e-3 * max_abs(reference);
  double worst = 0.0;
  for (std::size_t k = 0; k < reference.size(); ++k) {
    const double denom = std::max(std::abs(reference.data()[k]), floor);
    if (denom == 0.0) continue;
    worst = std::max(worst, std::abs(approx.data()[k] - reference.data()[k]) / denom);
  }
  return worst;
}

inline DenseMatrix random_orthonormal(std::size_t n, std::size_t r, Rng& rng) {
  return orthonormalize(rng.gaussian_matrix(n, r));
}

}  // namespace colcomplete::testing
