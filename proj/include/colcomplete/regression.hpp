#pragma once

// Gradient-descent machinery shared by the QPMA stages and the CUR+ baseline.

#include <cmath>
#include <concepts>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "colcomplete/errors.hpp"
#include "colcomplete/matrix.hpp"
#include "colcomplete/sampling.hpp"

namespace colcomplete {

template <typename P>
concept SmoothObjective = requires(const P& p, const DenseMatrix& x) {
  { p.value(x) } -> std::convertible_to<double>;
  { p.gradient(x) } -> std::same_as<DenseMatrix>;
};

enum class StopReason { GradientTolerance, MaxIterations, RoundoffFloor };

const char* to_string(StopReason reason);

struct DescentOptions {
  double step = 0.0;
  std::size_t max_iters = 1;
  double grad_tol = 0.0;
};

struct DescentResult {
  DenseMatrix x;
  std::vector<double> trace;  // objective at the start and after each accepted step
  std::size_t iterations = 0;
  double grad_norm = 0.0;
  StopReason reason = StopReason::MaxIterations;
};

// Fixed-step descent x <- x - step * grad(x). A step is accepted when it
// raises the objective by at most 1e-12, so recorded values never climb by
// more than that. A larger rise within relative round-off ends the run
// (RoundoffFloor) keeping the previous iterate; anything beyond throws
// DivergenceError.
template <SmoothObjective P>
DescentResult descend(const P& objective, DenseMatrix x0, const DescentOptions& opts) {
  if (!(opts.step > 0.0) || !std::isfinite(opts.step)) throw ArgumentError("step size must be positive");
  if (opts.max_iters < 1) throw ArgumentError("max_iters must be >= 1");
  DescentResult out{std::move(x0), {}, 0, 0.0, StopReason::MaxIterations};
  double f = objective.value(out.x);
  out.trace.push_back(f);
  for (std::size_t t = 1; t <= opts.max_iters; ++t) {
    DenseMatrix g = objective.gradient(out.x);
    out.grad_norm = frobenius_norm(g);
    if (out.grad_norm <= opts.grad_tol) {
      out.reason = StopReason::GradientTolerance;
      return out;
    }
    DenseMatrix next = out.x;
    auto nd = next.data();
    auto gd = g.data();
    for (std::size_t k = 0; k < nd.size(); ++k) nd[k] -= opts.step * gd[k];
    const double f_next = objective.value(next);
    if (!std::isfinite(f_next) || f_next > f * (1.0 + 1e-8) + 1e-12) {
      throw DivergenceError("objective increased from " + std::to_string(f) + " to " +
                                std::to_string(f_next) + "; step size too large",
                            t);
    }
    if (f_next > f + 1e-12) {
      out.reason = StopReason::RoundoffFloor;
      return out;
    }
    out.x = std::move(next);
    f = f_next;
    out.trace.push_back(f);
    out.iterations = t;
  }
  out.grad_norm = frobenius_norm(objective.gradient(out.x));
  if (out.grad_norm <= opts.grad_tol) out.reason = StopReason::GradientTolerance;
  return out;
}

// g(Q) = ||A - Q S_psi||_F^2 over the sampled columns.
class CoefficientObjective {
 public:
  CoefficientObjective(const DenseMatrix& a, const DenseMatrix& s_psi);
  double value(const DenseMatrix& q) const;
  DenseMatrix gradient(const DenseMatrix& q) const;
  // Lipschitz constant of the gradient, 2 ||S_psi||_2^2.
  double lipschitz() const;

 private:
  DenseMatrix residual(const DenseMatrix& q) const;
  const DenseMatrix& a_;
  const DenseMatrix& s_psi_;
};

// f(Z) = ||A - U Z B||_F^2 with B = V^T Psi (r x d).
class ColumnCoreObjective {
 public:
  ColumnCoreObjective(const DenseMatrix& a, const DenseMatrix& u, const DenseMatrix& b);
  double value(const DenseMatrix& z) const;
  DenseMatrix gradient(const DenseMatrix& z) const;
  // 2 ||B||_2^2 ||U||_2^2.
  double lipschitz() const;

 private:
  DenseMatrix residual(const DenseMatrix& z) const;
  const DenseMatrix& a_;
  const DenseMatrix& u_;
  const DenseMatrix& b_;
};

struct ObservedEntry {
  std::size_t row;
  std::size_t col;
  double value;
};

// f(Z) = sum over observed (i, j) of (m_ij - u_i^T Z v_j)^2, with u_i and v_j
// rows of U (n x r) and V (m x r).
class ObservedCoreObjective {
 public:
  ObservedCoreObjective(const DenseMatrix& u, const DenseMatrix& v, std::vector<ObservedEntry> entries);
  double value(const DenseMatrix& z) const;
  DenseMatrix gradient(const DenseMatrix& z) const;
  // Largest eigenvalue of the explicit Hessian (r <= 12) or its trace otherwise.
  double lipschitz() const;
  std::span<const ObservedEntry> entries() const noexcept { return entries_; }

 private:
  template <typename Visit>
  void for_each_residual(const DenseMatrix& z, Visit&& visit) const;
  const DenseMatrix& u_;
  const DenseMatrix& v_;
  std::vector<ObservedEntry> entries_;  // sorted by row
};

// Hessian of sum_{(i,j) in entries} (m_ij - u_i^T Z v_j)^2 with respect to
// vec(Z) (column-major): 2 sum vec(u_i v_j^T) vec(u_i v_j^T)^T, size r^2 x r^2.
DenseMatrix core_hessian(const DenseMatrix& u, const DenseMatrix& v, std::span<const Entry> entries);

}  // namespace colcomplete
