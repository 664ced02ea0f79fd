#include "colcomplete/qpma.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "colcomplete/errors.hpp"
#include "colcomplete/rng.hpp"
#include "colcomplete/svd.hpp"

namespace colcomplete {

namespace {

double default_grad_tol(const QpmaConfig& cfg, const DenseMatrix& a) {
  return cfg.grad_tol ? *cfg.grad_tol : 1e-10 * frobenius_norm(a);
}

void check_step(const std::optional<double>& step, const char* name) {
  if (step && (!(*step > 0.0) || !std::isfinite(*step)))
    throw ArgumentError(std::string(name) + " must be positive");
}

// Runs fn, prefixing any library error with the stage name.
template <typename Fn>
auto staged(const char* stage, Fn&& fn) {
  try {
    return fn();
  } catch (Error& e) {
    e.add_context(stage);
    throw;
  }
}

}  // namespace

void QpmaConfig::validate() const {
  if (target_rank < 1) throw ArgumentError("target rank must be >= 1");
  if (degree < 0) throw ArgumentError("degree must be >= 0");
  check_step(step_size, "step_size");
  check_step(step_size_z, "step_size_z");
  if (max_iters < 1) throw ArgumentError("max_iters must be >= 1");
  if (max_iters_z && *max_iters_z < 1) throw ArgumentError("max_iters_z must be >= 1");
  if (grad_tol && !(*grad_tol >= 0.0)) throw ArgumentError("grad_tol must be >= 0");
}

DenseMatrix estimate_column_space(const DenseMatrix& a, std::size_t r) {
  return svd_truncated(a, r).u;
}

double q_objective(const DenseMatrix& q, const DenseMatrix& a, const DenseMatrix& s_psi) {
  return CoefficientObjective(a, s_psi).value(q);
}

DenseMatrix q_gradient(const DenseMatrix& q, const DenseMatrix& a, const DenseMatrix& s_psi) {
  return CoefficientObjective(a, s_psi).gradient(q);
}

FitResult fit_q(const DenseMatrix& a, const DenseMatrix& s_psi, const QpmaConfig& cfg) {
  cfg.validate();
  const CoefficientObjective obj(a, s_psi);
  const double step = cfg.step_size ? *cfg.step_size : 1.0 / obj.lipschitz();
  Rng rng = Rng::stream(cfg.seed, "Q_init");
  DenseMatrix q0 = rng.gaussian_matrix(a.rows(), s_psi.rows());
  auto res = descend(obj, std::move(q0), {step, cfg.max_iters, default_grad_tol(cfg, a)});
  return {std::move(res.x), std::move(res.trace), res.iterations, res.reason, step};
}

DenseMatrix estimate_row_space(const DenseMatrix& q_hat, const PolyBasis& basis, std::size_t r) {
  const DenseMatrix qs = q_hat * basis.matrix();
  const SvdFactors f = svd_truncated(qs, r);
  const double top = f.sigma.front();
  if (!(top > 0.0) || f.sigma.back() <= 1e-13 * top * static_cast<double>(std::max(qs.rows(), qs.cols()))) {
    throw RankError("Q_hat S has rank below " + std::to_string(r) + " (sigma_r = " +
                    std::to_string(f.sigma.back()) + ")");
  }
  return f.v();
}

double z_objective(const DenseMatrix& z, const DenseMatrix& a, const DenseMatrix& u_a,
                   const DenseMatrix& v_qs_psi) {
  return ColumnCoreObjective(a, u_a, v_qs_psi).value(z);
}

DenseMatrix z_gradient(const DenseMatrix& z, const DenseMatrix& a, const DenseMatrix& u_a,
                       const DenseMatrix& v_qs_psi) {
  return ColumnCoreObjective(a, u_a, v_qs_psi).gradient(z);
}

FitResult fit_z(const DenseMatrix& a, const DenseMatrix& u_a, const DenseMatrix& v_qs_psi,
                const QpmaConfig& cfg) {
  cfg.validate();
  const ColumnCoreObjective obj(a, u_a, v_qs_psi);
  const double step = cfg.step_size_z ? *cfg.step_size_z : 1.0 / obj.lipschitz();
  DenseMatrix z0(u_a.cols(), v_qs_psi.rows());
  auto res = descend(obj, std::move(z0), {step, cfg.max_iters_z.value_or(cfg.max_iters), default_grad_tol(cfg, a)});
  return {std::move(res.x), std::move(res.trace), res.iterations, res.reason, step};
}

QpmaModel solve(const DenseMatrix& a, const ColumnSampler& sampler, const PolyBasis& basis,
                const QpmaConfig& cfg) {
  cfg.validate();
  if (a.cols() != sampler.count())
    throw ShapeError("A has " + std::to_string(a.cols()) + " columns but the sampler holds " +
                     std::to_string(sampler.count()));
  if (basis.cols() != sampler.total_columns())
    throw ShapeError("basis has " + std::to_string(basis.cols()) + " columns, expected " +
                     std::to_string(sampler.total_columns()));
  if (basis.degree() != static_cast<std::size_t>(cfg.degree))
    throw ArgumentError("basis degree does not match config degree");
  const std::size_t r = cfg.target_rank;
  if (r > sampler.count())
    throw RankError("target rank " + std::to_string(r) + " exceeds sampled column count " +
                    std::to_string(sampler.count()));

  DenseMatrix u_a = staged("column space", [&] { return estimate_column_space(a, r); });
  const DenseMatrix s_psi = sample_columns(basis.matrix(), sampler);
  FitResult q = staged("coefficient fit", [&] { return fit_q(a, s_psi, cfg); });
  DenseMatrix v_qs = staged("row space", [&] { return estimate_row_space(q.x, basis, r); });
  const DenseMatrix b = sample_columns(v_qs.transpose(), sampler);
  FitResult z = staged("core fit", [&] { return fit_z(a, u_a, b, cfg); });

  DenseMatrix m_hat = multiply_a_bt(u_a * z.x, v_qs);
  return QpmaModel{std::move(u_a),     std::move(q.x),  std::move(v_qs), std::move(z.x),
                   std::move(m_hat),   q.iterations,    z.iterations,    std::move(q.trace),
                   std::move(z.trace), q.reason,        z.reason,        q.step,
                   z.step,             cfg};
}

double constraint_residual(const DenseMatrix& a, const DenseMatrix& q_hat, const DenseMatrix& s_psi,
                           double noise_frobenius_sq) {
  // Psi has exactly d unit entries, so ||Psi||_F^2 = d.
  return q_objective(q_hat, a, s_psi) - noise_frobenius_sq * static_cast<double>(a.cols());
}

}  // namespace colcomplete
