#include "colcomplete/regression.hpp"

#include <algorithm>

#include "colcomplete/svd.hpp"

namespace colcomplete {

const char* to_string(StopReason reason) {
  switch (reason) {
    case StopReason::GradientTolerance:
      return "gradient_tolerance";
    case StopReason::MaxIterations:
      return "max_iterations";
    case StopReason::RoundoffFloor:
      return "roundoff_floor";
  }
  return "unknown";
}

CoefficientObjective::CoefficientObjective(const DenseMatrix& a, const DenseMatrix& s_psi)
    : a_(a), s_psi_(s_psi) {
  if (a.cols() != s_psi.cols()) throw ShapeError("A and S*Psi must have the same column count");
}

DenseMatrix CoefficientObjective::residual(const DenseMatrix& q) const {
  if (q.rows() != a_.rows() || q.cols() != s_psi_.rows()) {
    throw ShapeError("Q must be " + std::to_string(a_.rows()) + "x" + std::to_string(s_psi_.rows()));
  }
  return a_ - q * s_psi_;
}

double CoefficientObjective::value(const DenseMatrix& q) const {
  return frobenius_norm_squared(residual(q));
}

DenseMatrix CoefficientObjective::gradient(const DenseMatrix& q) const {
  return -2.0 * multiply_a_bt(residual(q), s_psi_);
}

double CoefficientObjective::lipschitz() const {
  const double s = spectral_norm(s_psi_);
  return 2.0 * s * s;
}

ColumnCoreObjective::ColumnCoreObjective(const DenseMatrix& a, const DenseMatrix& u,
                                         const DenseMatrix& b)
    : a_(a), u_(u), b_(b) {
  if (u.rows() != a.rows()) throw ShapeError("U_A must have as many rows as A");
  if (b.cols() != a.cols()) throw ShapeError("V^T Psi must have as many columns as A");
}

DenseMatrix ColumnCoreObjective::residual(const DenseMatrix& z) const {
  if (z.rows() != u_.cols() || z.cols() != b_.rows()) throw ShapeError("Z shape mismatch");
  return a_ - u_ * (z * b_);
}

double ColumnCoreObjective::value(const DenseMatrix& z) const {
  return frobenius_norm_squared(residual(z));
}

DenseMatrix ColumnCoreObjective::gradient(const DenseMatrix& z) const {
  return -2.0 * multiply_a_bt(multiply_at_b(u_, residual(z)), b_);
}

double ColumnCoreObjective::lipschitz() const {
  const double sb = spectral_norm(b_);
  const double su = spectral_norm(u_);
  return 2.0 * sb * sb * su * su;
}

ObservedCoreObjective::ObservedCoreObjective(const DenseMatrix& u, const DenseMatrix& v,
                                             std::vector<ObservedEntry> entries)
    : u_(u), v_(v), entries_(std::move(entries)) {
  if (u.cols() != v.cols()) throw ShapeError("U and V must have the same rank");
  for (const auto& e : entries_)
    if (e.row >= u.rows() || e.col >= v.rows()) throw IndexError("observed entry outside frame");
  std::stable_sort(entries_.begin(), entries_.end(),
                   [](const ObservedEntry& a, const ObservedEntry& b) {
                     return a.row != b.row ? a.row < b.row : a.col < b.col;
                   });
}

// Calls visit(entry, residual, w) with w = Z^T u_i (so u_i^T Z v_j = w . v_j).
template <typename Visit>
void ObservedCoreObjective::for_each_residual(const DenseMatrix& z, Visit&& visit) const {
  const std::size_t r = u_.cols();
  if (z.rows() != r || z.cols() != r) throw ShapeError("Z must be r x r");
  std::vector<double> w(r);
  std::size_t current = static_cast<std::size_t>(-1);
  for (const auto& e : entries_) {
    if (e.row != current) {
      current = e.row;
      std::fill(w.begin(), w.end(), 0.0);
      for (std::size_t a = 0; a < r; ++a) {
        const double ua = u_(current, a);
        for (std::size_t b = 0; b < r; ++b) w[b] += ua * z(a, b);
      }
    }
    double pred = 0.0;
    for (std::size_t b = 0; b < r; ++b) pred += w[b] * v_(e.col, b);
    visit(e, e.value - pred);
  }
}

double ObservedCoreObjective::value(const DenseMatrix& z) const {
  double s = 0.0;
  for_each_residual(z, [&](const ObservedEntry&, double res) { s += res * res; });
  return s;
}

DenseMatrix ObservedCoreObjective::gradient(const DenseMatrix& z) const {
  const std::size_t r = u_.cols();
  DenseMatrix g(r, r);
  std::vector<double> t(r, 0.0);
  std::size_t current = static_cast<std::size_t>(-1);
  auto flush = [&]() {
    if (current == static_cast<std::size_t>(-1)) return;
    for (std::size_t a = 0; a < r; ++a) {
      const double ua = u_(current, a);
      for (std::size_t b = 0; b < r; ++b) g(a, b) -= 2.0 * ua * t[b];
    }
    std::fill(t.begin(), t.end(), 0.0);
  };
  for_each_residual(z, [&](const ObservedEntry& e, double res) {
    if (e.row != current) {
      flush();
      current = e.row;
    }
    for (std::size_t b = 0; b < r; ++b) t[b] += res * v_(e.col, b);
  });
  flush();
  return g;
}

double ObservedCoreObjective::lipschitz() const {
  const std::size_t r = u_.cols();
  if (r <= 12) {
    std::vector<Entry> coords;
    coords.reserve(entries_.size());
    for (const auto& e : entries_) coords.emplace_back(e.row, e.col);
    return symmetric_eigenvalues(core_hessian(u_, v_, coords)).back();
  }
  double tr = 0.0;
  for (const auto& e : entries_) {
    double nu = 0.0, nv = 0.0;
    for (std::size_t a = 0; a < r; ++a) {
      nu += u_(e.row, a) * u_(e.row, a);
      nv += v_(e.col, a) * v_(e.col, a);
    }
    tr += 2.0 * nu * nv;
  }
  return tr;
}

DenseMatrix core_hessian(const DenseMatrix& u, const DenseMatrix& v, std::span<const Entry> entries) {
  if (u.cols() != v.cols()) throw ShapeError("U and V must have the same rank");
  const std::size_t r = u.cols();
  const std::size_t dim = r * r;
  DenseMatrix h(dim, dim);
  std::vector<double> w(dim);
  for (const auto& [i, j] : entries) {
    if (i >= u.rows() || j >= v.rows()) throw IndexError("entry outside frame");
    for (std::size_t b = 0; b < r; ++b)
      for (std::size_t a = 0; a < r; ++a) w[a + b * r] = u(i, a) * v(j, b);
    for (std::size_t p = 0; p < dim; ++p) {
      if (w[p] == 0.0) continue;
      for (std::size_t q = 0; q < dim; ++q) h(p, q) += 2.0 * w[p] * w[q];
    }
  }
  return h;
}

}  // namespace colcomplete
