#include "colcomplete/svd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "colcomplete/errors.hpp"

namespace colcomplete {

namespace {

struct Givens {
  double c;
  double s;
  double r;
};

// [c s; -s c] maps (f, g) to (r, 0).
Givens make_givens(double f, double g) {
  if (g == 0.0) return {1.0, 0.0, f};
  if (f == 0.0) return {0.0, 1.0, g};
  const double r = std::hypot(f, g);
  return {f / r, g / r, r};
}

// new_x = c x + s y ; new_y = -s x + c y for columns x, y of m.
void rotate_columns(DenseMatrix& m, std::size_t x, std::size_t y, double c, double s) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double a = m(i, x);
    const double b = m(i, y);
    m(i, x) = c * a + s * b;
    m(i, y) = -s * a + c * b;
  }
}

// Householder vector v (unit length, or zero for the identity) such that
// (I - 2 v v^T) x = alpha e_0.
double householder(std::vector<double>& x) {
  double tail = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) tail += x[i] * x[i];
  if (tail == 0.0) {
    // Already of the form alpha e_0; no reflection.
    const double alpha = x[0];
    std::fill(x.begin(), x.end(), 0.0);
    return alpha;
  }
  const double norm = std::sqrt(x[0] * x[0] + tail);
  const double alpha = x[0] > 0 ? -norm : norm;
  x[0] -= alpha;
  double vnorm = 0.0;
  for (double v : x) vnorm += v * v;
  vnorm = std::sqrt(vnorm);
  if (vnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    return alpha;
  }
  for (double& v : x) v /= vnorm;
  return alpha;
}


class Bidiagonal {
 public:
  // Requires w.rows() >= w.cols().
  explicit Bidiagonal(const DenseMatrix& a)
      : m_(a.rows()), n_(a.cols()), d_(n_, 0.0), e_(n_ > 1 ? n_ - 1 : 0, 0.0),
        u_(m_, n_), v_(DenseMatrix::identity(n_)) {
    DenseMatrix w = a;
    std::vector<std::vector<double>> left(n_), right(n_ > 1 ? n_ - 1 : 0);
    for (std::size_t k = 0; k < n_; ++k) {
      std::vector<double> x(m_ - k);
      for (std::size_t i = k; i < m_; ++i) x[i - k] = w(i, k);
      d_[k] = householder(x);
      for (std::size_t j = k; j < n_; ++j) {
        double dot = 0.0;
        for (std::size_t i = k; i < m_; ++i) dot += x[i - k] * w(i, j);
        for (std::size_t i = k; i < m_; ++i) w(i, j) -= 2.0 * dot * x[i - k];
      }
      left[k] = std::move(x);
      if (k + 1 < n_) {
        std::vector<double> y(n_ - k - 1);
        for (std::size_t j = k + 1; j < n_; ++j) y[j - k - 1] = w(k, j);
        e_[k] = householder(y);
        for (std::size_t i = k; i < m_; ++i) {
          double dot = 0.0;
          for (std::size_t j = k + 1; j < n_; ++j) dot += w(i, j) * y[j - k - 1];
          for (std::size_t j = k + 1; j < n_; ++j) w(i, j) -= 2.0 * dot * y[j - k - 1];
        }
        right[k] = std::move(y);
      }
    }
    for (std::size_t j = 0; j < n_; ++j) u_(j, j) = 1.0;
    for (std::size_t k = n_; k-- > 0;) {
      const auto& x = left[k];
      for (std::size_t j = 0; j < n_; ++j) {
        double dot = 0.0;
        for (std::size_t i = k; i < m_; ++i) dot += x[i - k] * u_(i, j);
        for (std::size_t i = k; i < m_; ++i) u_(i, j) -= 2.0 * dot * x[i - k];
      }
    }
    for (std::size_t k = right.size(); k-- > 0;) {
      const auto& y = right[k];
      for (std::size_t j = 0; j < n_; ++j) {
        double dot = 0.0;
        for (std::size_t i = k + 1; i < n_; ++i) dot += y[i - k - 1] * v_(i, j);
        for (std::size_t i = k + 1; i < n_; ++i) v_(i, j) -= 2.0 * dot * y[i - k - 1];
      }
    }
  }

  void diagonalize() {
    if (n_ < 2) return;
    double anorm = 0.0;
    for (std::size_t i = 0; i < n_; ++i)
      anorm = std::max(anorm, std::abs(d_[i]) + (i + 1 < n_ ? std::abs(e_[i]) : 0.0));
    const double zero_tol = kSvdRelTol * anorm;
    const std::size_t max_steps = 10 * n_ * n_;
    std::size_t steps = 0;
    std::size_t hi = n_ - 1;
    while (hi > 0) {
      for (std::size_t i = 0; i < hi; ++i) {
        if (std::abs(e_[i]) <= kSvdRelTol * (std::abs(d_[i]) + std::abs(d_[i + 1]))) e_[i] = 0.0;
      }
      for (std::size_t i = 0; i <= hi; ++i) {
        if (std::abs(d_[i]) <= zero_tol) d_[i] = 0.0;
      }
      if (e_[hi - 1] == 0.0) {
        --hi;
        continue;
      }
      std::size_t lo = hi - 1;
      while (lo > 0 && e_[lo - 1] != 0.0) --lo;

      bool chased = false;
      for (std::size_t i = lo; i < hi; ++i) {
        if (d_[i] == 0.0) {
          chase_zero_diagonal(i, hi);
          chased = true;
          break;
        }
      }
      if (chased) continue;
      if (d_[hi] == 0.0) {
        chase_zero_last(lo, hi);
        continue;
      }
      if (++steps > max_steps) throw ConvergenceError("Golub-Kahan SVD did not converge", steps);
      qr_step(lo, hi);
    }
  }

  SvdFactors factors() && {
    for (std::size_t i = 0; i < n_; ++i) {
      if (d_[i] < 0.0) {
        d_[i] = -d_[i];
        for (std::size_t r = 0; r < n_; ++r) v_(r, i) = -v_(r, i);
      }
    }
    std::vector<std::size_t> order(n_);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return d_[a] > d_[b]; });
    SvdFactors out{DenseMatrix(m_, n_), std::vector<double>(n_), DenseMatrix(n_, n_)};
    for (std::size_t k = 0; k < n_; ++k) {
      const std::size_t src = order[k];
      out.sigma[k] = d_[src];
      for (std::size_t i = 0; i < m_; ++i) out.u(i, k) = u_(i, src);
      for (std::size_t j = 0; j < n_; ++j) out.vt(k, j) = v_(j, src);
    }
    return out;
  }

 private:
  // Wilkinson-shifted implicit QR sweep on the unreduced block [lo, hi].
  void qr_step(std::size_t lo, std::size_t hi) {
    const double t11 = d_[hi - 1] * d_[hi - 1] + (hi - 1 > lo ? e_[hi - 2] * e_[hi - 2] : 0.0);
    const double t12 = d_[hi - 1] * e_[hi - 1];
    const double t22 = d_[hi] * d_[hi] + e_[hi - 1] * e_[hi - 1];
    const double delta = 0.5 * (t11 - t22);
    const double denom = delta + std::copysign(std::hypot(delta, t12), delta == 0.0 ? 1.0 : delta);
    const double shift = denom == 0.0 ? t22 : t22 - t12 * t12 / denom;

    double y = d_[lo] * d_[lo] - shift;
    double z = d_[lo] * e_[lo];
    for (std::size_t k = lo; k < hi; ++k) {
      Givens g = make_givens(y, z);
      if (k > lo) e_[k - 1] = g.r;
      double a = d_[k];
      double b = e_[k];
      d_[k] = g.c * a + g.s * b;
      e_[k] = -g.s * a + g.c * b;
      const double bulge = g.s * d_[k + 1];
      d_[k + 1] = g.c * d_[k + 1];
      rotate_columns(v_, k, k + 1, g.c, g.s);

      g = make_givens(d_[k], bulge);
      d_[k] = g.r;
      a = e_[k];
      b = d_[k + 1];
      e_[k] = g.c * a + g.s * b;
      d_[k + 1] = -g.s * a + g.c * b;
      if (k + 1 < hi) {
        y = e_[k];
        z = g.s * e_[k + 1];
        e_[k + 1] = g.c * e_[k + 1];
      }
      rotate_columns(u_, k, k + 1, g.c, g.s);
    }
  }

  // d[i] == 0 with i < hi: rotate row i against rows i+1..hi to clear e[i].
  void chase_zero_diagonal(std::size_t i, std::size_t hi) {
    double f = e_[i];
    e_[i] = 0.0;
    for (std::size_t j = i + 1; j <= hi; ++j) {
      const Givens g = make_givens(d_[j], f);
      d_[j] = g.r;
      if (j < hi) {
        f = -g.s * e_[j];
        e_[j] = g.c * e_[j];
      }
      rotate_columns(u_, j, i, g.c, g.s);
    }
  }

  // d[hi] == 0: rotate column hi against columns hi-1..lo to clear e[hi-1].
  void chase_zero_last(std::size_t lo, std::size_t hi) {
    double f = e_[hi - 1];
    e_[hi - 1] = 0.0;
    for (std::size_t j = hi; j-- > lo;) {
      const Givens g = make_givens(d_[j], f);
      d_[j] = g.r;
      if (j > lo) {
        f = -g.s * e_[j - 1];
        e_[j - 1] = g.c * e_[j - 1];
      }
      rotate_columns(v_, j, hi, g.c, g.s);
    }
  }

  std::size_t m_;
  std::size_t n_;
  std::vector<double> d_;
  std::vector<double> e_;
  DenseMatrix u_;
  DenseMatrix v_;
};

SvdFactors swap_transposed(SvdFactors f) {
  return SvdFactors{f.vt.transpose(), std::move(f.sigma), f.u.transpose()};
}

// Extends the columns of u flagged in `missing` to an orthonormal set.
void complete_orthonormal(DenseMatrix& u, const std::vector<bool>& missing) {
  const std::size_t n = u.rows();
  std::size_t probe = 0;
  for (std::size_t c = 0; c < u.cols(); ++c) {
    if (!missing[c]) continue;
    while (true) {
      if (probe >= n) throw RankError("cannot complete orthonormal basis");
      std::vector<double> x(n, 0.0);
      x[probe++] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t k = 0; k < u.cols(); ++k) {
          if (k == c || (missing[k] && k > c)) continue;
          double dot = 0.0;
          for (std::size_t i = 0; i < n; ++i) dot += u(i, k) * x[i];
          for (std::size_t i = 0; i < n; ++i) x[i] -= dot * u(i, k);
        }
      }
      double norm = 0.0;
      for (double v : x) norm += v * v;
      norm = std::sqrt(norm);
      if (norm < 0.5) continue;
      for (std::size_t i = 0; i < n; ++i) u(i, c) = x[i] / norm;
      break;
    }
  }
}

SvdFactors jacobi_tall(const DenseMatrix& a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  DenseMatrix w = a;
  DenseMatrix v = DenseMatrix::identity(n);
  const std::size_t max_sweeps = std::max<std::size_t>(10 * n * n, 30);
  constexpr double eps = 1e-15;
  bool rotated = true;
  std::size_t sweep = 0;
  while (rotated) {
    if (sweep++ >= max_sweeps) throw ConvergenceError("Jacobi SVD did not converge", sweep);
    rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          alpha += w(i, p) * w(i, p);
          beta += w(i, q) * w(i, q);
          gamma += w(i, p) * w(i, q);
        }
        if (gamma == 0.0 || std::abs(gamma) <= eps * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        rotate_columns(w, p, q, c, -s);
        rotate_columns(v, p, q, c, -s);
      }
    }
  }
  std::vector<double> norms(n);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += w(i, j) * w(i, j);
    norms[j] = std::sqrt(s);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return norms[x] > norms[y]; });
  SvdFactors out{DenseMatrix(m, n), std::vector<double>(n), DenseMatrix(n, n)};
  const double floor = norms[order[0]] * 1e-13 * static_cast<double>(m);
  std::vector<bool> missing(n, false);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t src = order[k];
    out.sigma[k] = norms[src];
    for (std::size_t j = 0; j < n; ++j) out.vt(k, j) = v(j, src);
    if (norms[src] <= floor || norms[src] == 0.0) {
      missing[k] = true;
      continue;
    }
    for (std::size_t i = 0; i < m; ++i) out.u(i, k) = w(i, src) / norms[src];
  }
  if (std::any_of(missing.begin(), missing.end(), [](bool b) { return b; }))
    complete_orthonormal(out.u, missing);
  return out;
}

}  // namespace

DenseMatrix SvdFactors::reconstruct() const {
  DenseMatrix us = u;
  for (std::size_t i = 0; i < us.rows(); ++i)
    for (std::size_t k = 0; k < sigma.size(); ++k) us(i, k) *= sigma[k];
  return us * vt;
}

SvdFactors svd_full(const DenseMatrix& a) {
  if (a.rows() < a.cols()) return swap_transposed(svd_full(a.transpose()));
  Bidiagonal b(a);
  b.diagonalize();
  return std::move(b).factors();
}

SvdFactors svd_truncated(const DenseMatrix& a, std::size_t r) {
  const std::size_t p = std::min(a.rows(), a.cols());
  if (r < 1 || r > p) {
    throw RankError("truncation rank " + std::to_string(r) + " outside [1, " + std::to_string(p) +
                    "]");
  }
  SvdFactors full = svd_full(a);
  if (r == p) return full;
  SvdFactors out{full.u.columns(0, r), std::vector<double>(full.sigma.begin(), full.sigma.begin() + r),
                 DenseMatrix(r, a.cols())};
  for (std::size_t k = 0; k < r; ++k)
    for (std::size_t j = 0; j < a.cols(); ++j) out.vt(k, j) = full.vt(k, j);
  return out;
}

SvdFactors svd_jacobi(const DenseMatrix& a) {
  if (a.rows() < a.cols()) return swap_transposed(jacobi_tall(a.transpose()));
  return jacobi_tall(a);
}

std::vector<double> singular_values(const DenseMatrix& a) { return svd_full(a).sigma; }

std::vector<double> symmetric_eigenvalues(const DenseMatrix& a) {
  if (a.rows() != a.cols()) throw ShapeError("symmetric_eigenvalues needs a square matrix");
  const std::size_t n = a.rows();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(a(i, j) - a(j, i)) > 1e-10 * std::max(1.0, max_abs(a)))
        throw ArgumentError("matrix is not symmetric");
  DenseMatrix w = a;
  const double scale = std::max(frobenius_norm(a), std::numeric_limits<double>::min());
  const std::size_t max_sweeps = std::max<std::size_t>(10 * n * n, 30);
  for (std::size_t sweep = 0;; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += w(i, j) * w(i, j);
    if (std::sqrt(off) <= 1e-15 * scale) break;
    if (sweep >= max_sweeps) throw ConvergenceError("Jacobi eigenvalue iteration stalled", sweep);
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = w(p, q);
        if (apq == 0.0) continue;
        const double theta = (w(q, q) - w(p, p)) / (2.0 * apq);
        const double t =
            std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double wkp = w(k, p);
          const double wkq = w(k, q);
          w(k, p) = c * wkp - s * wkq;
          w(k, q) = s * wkp + c * wkq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double wpk = w(p, k);
          const double wqk = w(q, k);
          w(p, k) = c * wpk - s * wqk;
          w(q, k) = s * wpk + c * wqk;
        }
      }
    }
  }
  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = w(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

}  // namespace colcomplete
