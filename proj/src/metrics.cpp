#include "colcomplete/metrics.hpp"

#include "colcomplete/errors.hpp"
#include "colcomplete/svd.hpp"

namespace colcomplete {

namespace {

void check_shapes(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError("metric inputs differ in shape");
}

}  // namespace

double nmse(const DenseMatrix& m_hat, const DenseMatrix& m_true) {
  check_shapes(m_hat, m_true);
  const double denom = frobenius_norm(m_true);
  if (denom == 0.0) throw DegenerateMetricError("NMSE undefined for a zero reference matrix");
  return frobenius_norm(m_true - m_hat) / denom;
}

double spectral_sq_error(const DenseMatrix& m_hat, const DenseMatrix& m_true) {
  check_shapes(m_hat, m_true);
  const double s = spectral_norm(m_true - m_hat);
  return s * s;
}

std::size_t numerical_rank(const DenseMatrix& x) {
  const auto sigma = singular_values(x);
  if (sigma.empty() || sigma.front() == 0.0) return 0;
  std::size_t k = 0;
  while (k < sigma.size() && sigma[k] > 1e-10 * sigma.front()) ++k;
  return k;
}

EvalResult evaluate(const DenseMatrix& m_hat, const DenseMatrix& m_true) {
  check_shapes(m_hat, m_true);
  const DenseMatrix diff = m_true - m_hat;
  const double s = spectral_norm(diff);
  return {nmse(m_hat, m_true), s * s, frobenius_norm_squared(diff), numerical_rank(m_hat)};
}

}  // namespace colcomplete
