#include "colcomplete/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "colcomplete/errors.hpp"
#include "colcomplete/metrics.hpp"
#include "colcomplete/regression.hpp"
#include "colcomplete/svd.hpp"

namespace colcomplete {

namespace {

SvdFactors rank_r_factors(const DenseMatrix& x, std::size_t r) {
  SvdFactors f = svd_truncated(x, r);
  const double tol = 1e-13 * static_cast<double>(std::max(x.rows(), x.cols()));
  if (!(f.sigma.front() > 0.0) || f.sigma.back() <= tol * f.sigma.front())
    throw RankError("matrix has rank below " + std::to_string(r));
  return f;
}

double max_scaled_row_energy(const DenseMatrix& f, double scale) {
  double best = 0.0;
  for (std::size_t i = 0; i < f.rows(); ++i) {
    double s = 0.0;
    for (double v : f.row(i)) s += v * v;
    best = std::max(best, scale * s);
  }
  return best;
}

}  // namespace

double incoherence(const DenseMatrix& x, std::size_t r) {
  const SvdFactors f = rank_r_factors(x, r);
  const double dr = static_cast<double>(r);
  return std::max(max_scaled_row_energy(f.u, static_cast<double>(x.rows()) / dr),
                  max_scaled_row_energy(f.v(), static_cast<double>(x.cols()) / dr));
}

double delta_gap(std::span<const double> m_sigma_r, std::span<const double> qs_sigma_perp, double tol) {
  if (m_sigma_r.empty()) throw ArgumentError("delta gap needs at least one singular value of M");
  double delta = std::numeric_limits<double>::infinity();
  for (double a : m_sigma_r) {
    delta = std::min(delta, a);
    for (double b : qs_sigma_perp) delta = std::min(delta, std::abs(a - b));
  }
  if (!(delta > tol))
    throw AssumptionViolation("singular-value gap delta = " + std::to_string(delta) + " is not positive");
  return delta;
}

WedinResiduals wedin_residuals(const DenseMatrix& qs, const DenseMatrix& m, std::size_t r) {
  if (qs.rows() != m.rows() || qs.cols() != m.cols()) throw ShapeError("QS and M differ in shape");
  const SvdFactors f = svd_truncated(m, r);
  const DenseMatrix v = f.v();
  DenseMatrix r_mat = qs * v;
  DenseMatrix s_mat = multiply_at_b(qs, f.u);
  for (std::size_t k = 0; k < r; ++k) {
    for (std::size_t i = 0; i < r_mat.rows(); ++i) r_mat(i, k) -= f.u(i, k) * f.sigma[k];
    for (std::size_t j = 0; j < s_mat.rows(); ++j) s_mat(j, k) -= v(j, k) * f.sigma[k];
  }
  return {std::move(r_mat), std::move(s_mat)};
}

// Singular values of v1^T v2 after shape and orthonormality checks.
static std::vector<double> cosines(const DenseMatrix& v1, const DenseMatrix& v2) {
  if (v1.rows() != v2.rows() || v1.cols() != v2.cols()) throw ShapeError("bases differ in shape");
  for (const DenseMatrix* v : {&v1, &v2}) {
    const double dev = orthonormality_deviation(*v);
    if (dev > kTolOrth) throw OrthonormalityError("basis is not orthonormal", dev);
  }
  return singular_values(multiply_at_b(v1, v2));
}

std::vector<double> canonical_angles(const DenseMatrix& v1, const DenseMatrix& v2) {
  std::vector<double> angles;
  for (double g : cosines(v1, v2)) angles.push_back(std::acos(std::clamp(g, -1.0, 1.0)));
  std::sort(angles.begin(), angles.end());
  return angles;
}

double sin_theta_frobenius(const DenseMatrix& v1, const DenseMatrix& v2) {
  // sum of 1 - cos^2; accurate for small angles where acos loses digits
  double s = 0.0;
  for (double g : cosines(v1, v2)) {
    const double c = std::min(1.0, g);
    s += 1.0 - c * c;
  }
  return std::sqrt(std::max(0.0, s));
}

DenseMatrix hessian_of_f(const DenseMatrix& u_a, const DenseMatrix& v_rows) {
  if (u_a.cols() > 12) throw SizeError("explicit Hessian limited to r <= 12");
  std::vector<Entry> omega;
  omega.reserve(u_a.rows() * v_rows.rows());
  for (std::size_t i = 0; i < u_a.rows(); ++i)
    for (std::size_t k = 0; k < v_rows.rows(); ++k) omega.emplace_back(i, k);
  return core_hessian(u_a, v_rows, omega);
}

BoundBreakdown spectral_error_bound(const BoundInputs& in, BoundVariant variant) {
  if (!(in.delta > 0.0)) throw AssumptionViolation("error bound requires delta > 0");
  const double m = static_cast<double>(in.m);
  const double n = static_cast<double>(in.n);
  const double d = static_cast<double>(in.d);
  const double s1 = in.sigma1 * in.sigma1;
  BoundBreakdown out;
  out.terms.emplace_back("tail", in.sigma_r1 * in.sigma_r1 * (2.0 + 8.0 * m / d) * (1.0 + (n + m) / d));
  if (variant == BoundVariant::Old) {
    out.terms.emplace_back("top", 4.0 * s1);
    const double res = in.r_resid_f * in.r_resid_f + in.s_resid_f * in.s_resid_f;
    out.terms.emplace_back("residual", s1 * (12.0 + 8.0 * m / d) * res / (in.delta * in.delta));
  } else {
    out.terms.emplace_back("noise", s1 * (4.0 + 16.0 * m / d) *
                                        (in.e_f * in.e_f / (in.delta * in.delta) +
                                         2.0 * std::sqrt(2.0) * in.e_f / in.delta));
  }
  out.terms.emplace_back("alignment", 4.0 * m / d * in.vv_dev_f * in.vv_dev_f);
  for (const auto& [name, v] : out.terms) out.total += v;
  return out;
}

std::size_t sample_floor(double mu, double mu_hat, std::size_t r, std::size_t n, double t1, double t2) {
  const double dr = static_cast<double>(r);
  const double lr = std::log(dr);
  const double a = 7.0 * mu * dr * (t1 + lr);
  const double b = 7.0 * mu_hat * mu_hat * dr * dr * (t2 + lr) / static_cast<double>(n);
  const double v = std::ceil(std::max(a, b));
  return v < 1.0 ? 1 : static_cast<std::size_t>(v);
}

TheoryReport theory_report(const TheoryInputs& in) {
  if (!in.m_true || !in.m_hat || !in.u_a || !in.v_qs || !in.sampler)
    throw ArgumentError("theory report needs M, M_hat, U_A, V_QS and the sampler");
  const DenseMatrix& m = *in.m_true;
  const std::size_t r = in.r;
  TheoryReport rep;
  const SvdFactors fm = svd_full(m);
  if (r >= fm.sigma.size()) throw RankError("theory report needs r < min(n, m)");
  rep.sigma1 = fm.sigma[0];
  rep.sigma_r1 = fm.sigma[r];
  rep.mu = incoherence(m, r);
  try {
    rep.mu_hat = incoherence(*in.m_hat, r);
  } catch (const RankError&) {
    rep.mu_hat = std::numeric_limits<double>::quiet_NaN();
    rep.notes.push_back("estimate has rank below r; mu_hat undefined");
  }
  rep.measured_sq_spectral_err = spectral_sq_error(*in.m_hat, m);
  const std::size_t d = in.sampler->count();
  rep.alpha_floor = static_cast<double>(d) / (2.0 * static_cast<double>(m.cols()));
  const DenseMatrix v_m = fm.v().columns(0, r);
  rep.sin_theta_f = sin_theta_frobenius(v_m, *in.v_qs);

  if (in.u_a->cols() <= 12) {
    const DenseMatrix v_rows = in.v_qs->gather_rows(in.sampler->indices());
    rep.lambda_min_h = symmetric_eigenvalues(hessian_of_f(*in.u_a, v_rows)).front();
  } else {
    rep.notes.push_back("Hessian skipped for r > 12");
  }
  const double t = std::log(static_cast<double>(r));
  if (std::isfinite(rep.mu_hat)) rep.sample_floor = sample_floor(rep.mu, rep.mu_hat, r, m.rows(), t, t);

  if (!in.qs) {
    rep.notes.push_back("no ground truth: residuals, delta, alignment term and bounds unavailable");
    return rep;
  }
  const DenseMatrix& qs = *in.qs;
  const WedinResiduals w = wedin_residuals(qs, m, r);
  rep.r_resid_f = frobenius_norm(w.r);
  rep.s_resid_f = frobenius_norm(w.s_resid);
  if (in.e) rep.e_f = frobenius_norm(*in.e);
  rep.vv_dev_f = frobenius_norm(multiply_at_b(v_m, *in.v_qs) - DenseMatrix::identity(r));

  const auto qs_sigma = singular_values(qs);
  const std::span<const double> perp(qs_sigma.data() + std::min(r, qs_sigma.size()),
                                     qs_sigma.size() - std::min(r, qs_sigma.size()));
  try {
    rep.delta = delta_gap(std::span<const double>(fm.sigma.data(), r), perp);
  } catch (const AssumptionViolation& e) {
    rep.notes.push_back(e.what());
    return rep;
  }
  rep.assumptions_hold = true;
  BoundInputs b;
  b.sigma1 = rep.sigma1;
  b.sigma_r1 = rep.sigma_r1;
  b.m = m.cols();
  b.n = m.rows();
  b.d = d;
  b.r_resid_f = *rep.r_resid_f;
  b.s_resid_f = *rep.s_resid_f;
  b.e_f = rep.e_f ? *rep.e_f : frobenius_norm(m - qs);
  b.delta = *rep.delta;
  b.vv_dev_f = *rep.vv_dev_f;
  rep.bound_old = spectral_error_bound(b, BoundVariant::Old);
  rep.bound_new = spectral_error_bound(b, BoundVariant::New);
  return rep;
}

}  // namespace colcomplete
