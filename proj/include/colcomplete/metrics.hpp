#pragma once

#include <cstddef>

#include "colcomplete/matrix.hpp"

namespace colcomplete {

struct EvalResult {
  double nmse = 0.0;
  double sq_spectral_err = 0.0;
  double sq_frobenius_err = 0.0;
  std::size_t rank_of_estimate = 0;
};

// ||M - M_hat||_F / ||M||_F (a ratio of norms, not of squares). Throws
// DegenerateMetricError for a zero reference.
double nmse(const DenseMatrix& m_hat, const DenseMatrix& m_true);

// ||M - M_hat||_2^2.
double spectral_sq_error(const DenseMatrix& m_hat, const DenseMatrix& m_true);

// Numerical rank: singular values above 1e-10 * sigma_1.
std::size_t numerical_rank(const DenseMatrix& x);

EvalResult evaluate(const DenseMatrix& m_hat, const DenseMatrix& m_true);

}  // namespace colcomplete
