#pragma once

#include <cstddef>
#include <vector>

#include "colcomplete/matrix.hpp"

namespace colcomplete {

// a ~= u * diag(sigma) * vt with orthonormal columns in u, orthonormal rows in
// vt and sigma sorted non-increasing.
struct SvdFactors {
  DenseMatrix u;              // rows x p
  std::vector<double> sigma;  // p
  DenseMatrix vt;             // p x cols

  std::size_t rank_count() const noexcept { return sigma.size(); }
  DenseMatrix reconstruct() const;
  // Right factor as an m x p matrix with orthonormal columns.
  DenseMatrix v() const { return vt.transpose(); }
};

// Thin SVD, p = min(rows, cols), via Householder bidiagonalization followed by
// implicit-shift Golub-Kahan QR sweeps. Throws ConvergenceError on stall.
SvdFactors svd_full(const DenseMatrix& a);

// Top-r factors of svd_full(a). Throws RankError unless 1 <= r <= min(rows, cols).
SvdFactors svd_truncated(const DenseMatrix& a, std::size_t r);

// One-sided (Hestenes) Jacobi SVD. Independent of svd_full; used as a
// reference and for cross-checks.
SvdFactors svd_jacobi(const DenseMatrix& a);

std::vector<double> singular_values(const DenseMatrix& a);

// Eigenvalues of a symmetric matrix in ascending order (cyclic Jacobi).
std::vector<double> symmetric_eigenvalues(const DenseMatrix& a);

inline constexpr double kSvdRelTol = 1e-12;

}  // namespace colcomplete
