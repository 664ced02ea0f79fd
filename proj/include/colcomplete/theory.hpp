#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "colcomplete/matrix.hpp"
#include "colcomplete/sampling.hpp"

namespace colcomplete {

// max( max_i (n/r)||u_i||^2, max_j (m/r)||v_j||^2 ) over the rank-r singular
// factors of x. Throws RankError when sigma_r(x) is zero to working precision.
double incoherence(const DenseMatrix& x, std::size_t r);

// min( min_{i,j} |m_sigma_r[i] - qs_sigma_perp[j]|, min_i m_sigma_r[i] ).
// Throws AssumptionViolation when the result is <= tol.
double delta_gap(std::span<const double> m_sigma_r, std::span<const double> qs_sigma_perp,
                 double tol = 1e-12);

struct WedinResiduals {
  DenseMatrix r;       // QS V_M - U_M Sigma_M, n x r
  DenseMatrix s_resid; // (QS)^T U_M - V_M Sigma_M, m x r
};

WedinResiduals wedin_residuals(const DenseMatrix& qs, const DenseMatrix& m, std::size_t r);

// Principal angles in [0, pi/2], ascending. Throws OrthonormalityError.
std::vector<double> canonical_angles(const DenseMatrix& v1, const DenseMatrix& v2);
double sin_theta_frobenius(const DenseMatrix& v1, const DenseMatrix& v2);

// Hessian of f(Z) = ||A - U Z B||^2 with B^T = v_rows (d x r, the rows of the
// row-space basis at the sampled columns), i.e. Omega = [n] x C. r^2 x r^2,
// vec in column-major order. Throws SizeError for r > 12.
DenseMatrix hessian_of_f(const DenseMatrix& u_a, const DenseMatrix& v_rows);

enum class BoundVariant { Old, New };

struct BoundInputs {
  double sigma1 = 0.0;
  double sigma_r1 = 0.0;
  std::size_t m = 1;
  std::size_t n = 1;
  std::size_t d = 1;
  double r_resid_f = 0.0;
  double s_resid_f = 0.0;
  double e_f = 0.0;
  double delta = 0.0;
  double vv_dev_f = 0.0;  // ||V_M^T V_QS - I_r||_F
};

struct BoundBreakdown {
  double total = 0.0;
  std::vector<std::pair<std::string, double>> terms;
};

// Throws AssumptionViolation when delta <= 0.
BoundBreakdown spectral_error_bound(const BoundInputs& in, BoundVariant variant);

// ceil(max(7 mu r (t1 + ln r), 7 mu_hat^2 r^2 (t2 + ln r) / n)), at least 1.
std::size_t sample_floor(double mu, double mu_hat, std::size_t r, std::size_t n, double t1, double t2);

struct TheoryReport {
  double mu = 0.0;
  double mu_hat = 0.0;
  std::optional<double> delta;
  std::optional<double> r_resid_f;
  std::optional<double> s_resid_f;
  std::optional<double> e_f;
  double sin_theta_f = 0.0;  // between the rank-r row spaces of M and V_QS
  std::optional<double> vv_dev_f;
  std::optional<double> lambda_min_h;
  double alpha_floor = 0.0;  // d / (2m)
  std::optional<BoundBreakdown> bound_old;
  std::optional<BoundBreakdown> bound_new;
  double measured_sq_spectral_err = 0.0;
  double sigma1 = 0.0;
  double sigma_r1 = 0.0;
  std::size_t sample_floor = 0;
  bool assumptions_hold = false;
  std::vector<std::string> notes;
};

struct TheoryInputs {
  const DenseMatrix* m_true = nullptr;
  const DenseMatrix* qs = nullptr;  // null in real-data mode
  const DenseMatrix* e = nullptr;
  const DenseMatrix* m_hat = nullptr;
  const DenseMatrix* u_a = nullptr;
  const DenseMatrix* v_qs = nullptr;
  const ColumnSampler* sampler = nullptr;
  std::size_t r = 1;
};

TheoryReport theory_report(const TheoryInputs& in);

}  // namespace colcomplete
