#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "colcomplete/matrix.hpp"
#include "colcomplete/polybasis.hpp"
#include "colcomplete/regression.hpp"
#include "colcomplete/sampling.hpp"

namespace colcomplete {

struct QpmaConfig {
  std::size_t target_rank = 1;
  int degree = 0;
  // Absolute step sizes; unset means the inverse-Lipschitz defaults
  // 1/(2||S Psi||^2) and 1/(2||V^T Psi||^2 ||U_A||^2).
  std::optional<double> step_size;
  std::optional<double> step_size_z;
  std::size_t max_iters = 5000;
  // Cap for the Z descent; unset means max_iters. Its conditioning depends on
  // which columns were drawn, unlike the Q stage.
  std::optional<std::size_t> max_iters_z;
  // Unset means 1e-10 * ||A||_F.
  std::optional<double> grad_tol;
  std::uint64_t seed = 0;

  // Throws ArgumentError when a field is out of range.
  void validate() const;
};

struct FitResult {
  DenseMatrix x;
  std::vector<double> trace;
  std::size_t iterations = 0;
  StopReason reason = StopReason::MaxIterations;
  double step = 0.0;
};

struct QpmaModel {
  DenseMatrix u_a;   // n x r
  DenseMatrix q_hat; // n x (l+1)
  DenseMatrix v_qs;  // m x r
  DenseMatrix z_hat; // r x r
  DenseMatrix m_hat; // n x m
  std::size_t iters_q = 0;
  std::size_t iters_z = 0;
  std::vector<double> trace_q;
  std::vector<double> trace_z;
  StopReason stop_q = StopReason::MaxIterations;
  StopReason stop_z = StopReason::MaxIterations;
  double step_q = 0.0;
  double step_z = 0.0;
  QpmaConfig config;
};

// Top-r left singular vectors of the sampled columns.
DenseMatrix estimate_column_space(const DenseMatrix& a, std::size_t r);

double q_objective(const DenseMatrix& q, const DenseMatrix& a, const DenseMatrix& s_psi);
DenseMatrix q_gradient(const DenseMatrix& q, const DenseMatrix& a, const DenseMatrix& s_psi);

// Descent on ||A - Q S_psi||^2 from Q_1 ~ N(0, 1) drawn with cfg.seed.
FitResult fit_q(const DenseMatrix& a, const DenseMatrix& s_psi, const QpmaConfig& cfg);

// Top-r right singular vectors of q_hat * S, m x r. Throws RankError when
// sigma_r(q_hat S) is zero to working precision.
DenseMatrix estimate_row_space(const DenseMatrix& q_hat, const PolyBasis& basis, std::size_t r);

double z_objective(const DenseMatrix& z, const DenseMatrix& a, const DenseMatrix& u_a,
                   const DenseMatrix& v_qs_psi);
DenseMatrix z_gradient(const DenseMatrix& z, const DenseMatrix& a, const DenseMatrix& u_a,
                       const DenseMatrix& v_qs_psi);

// Descent on ||A - U_A Z B||^2, B = v_qs_psi (r x d), from Z = 0.
FitResult fit_z(const DenseMatrix& a, const DenseMatrix& u_a, const DenseMatrix& v_qs_psi,
                const QpmaConfig& cfg);

// Full pipeline. Errors carry the failing stage as a message prefix.
QpmaModel solve(const DenseMatrix& a, const ColumnSampler& sampler, const PolyBasis& basis,
                const QpmaConfig& cfg);

// ||A - Q_hat S Psi||_F^2 - ||E||_F^2 ||Psi||_F^2. Non-positive when the
// optional noise-level constraint is met.
double constraint_residual(const DenseMatrix& a, const DenseMatrix& q_hat, const DenseMatrix& s_psi,
                           double noise_frobenius_sq);

}  // namespace colcomplete
