#include "colcomplete/curplus.hpp"

#include <algorithm>
#include <cmath>

#include "colcomplete/errors.hpp"
#include "colcomplete/rng.hpp"
#include "colcomplete/svd.hpp"

namespace colcomplete {

namespace {

// Top-r factor of a sample block; RankError when the block has rank < r.
SvdFactors top_factors(const DenseMatrix& block, std::size_t r, const char* what) {
  if (r > std::min(block.rows(), block.cols()))
    throw RankError(std::string(what) + " block is too small for rank " + std::to_string(r));
  SvdFactors f = svd_truncated(block, r);
  const double tol = 1e-13 * static_cast<double>(std::max(block.rows(), block.cols()));
  if (!(f.sigma.front() > 0.0) || f.sigma.back() <= tol * f.sigma.front())
    throw RankError(std::string(what) + " have rank below " + std::to_string(r));
  return f;
}

}  // namespace

void CurPlusSpec::validate(std::size_t n, std::size_t m) const {
  if (r < 1) throw ArgumentError("CUR+ rank must be >= 1");
  if (d_rows > n) throw IndexError("more sampled rows than rows");
  if (d_cols > m) throw IndexError("more sampled columns than columns");
  if (d_cols < r) throw RankError("CUR+ needs at least r sampled columns");
  if (d_rows < r) throw RankError("CUR+ needs at least r sampled rows");
  if (max_iters < 1) throw ArgumentError("max_iters must be >= 1");
  if (step_size && (!(*step_size > 0.0) || !std::isfinite(*step_size)))
    throw ArgumentError("step_size must be positive");
  if (grad_tol && !(*grad_tol >= 0.0)) throw ArgumentError("grad_tol must be >= 0");
}

CurSamples draw_cur_samples(std::size_t n, std::size_t m, const CurPlusSpec& spec) {
  spec.validate(n, m);
  const auto col_perm = random_permutation(m, spec.seed);
  ColumnSampler cols = sampler_from_prefix(m, col_perm, spec.d_cols);
  const auto row_perm = random_permutation(n, Rng::derive_seed(spec.seed, "rows"));
  std::vector<std::size_t> rows(row_perm.begin(), row_perm.begin() + spec.d_rows);
  std::sort(rows.begin(), rows.end());
  const EntryIndexSet structured = omega_of_columns(n, cols).merged(omega_of_rows(rows, n, m));
  EntryIndexSet extra = sample_entries_uniform(n, m, spec.extra_entries,
                                               Rng::derive_seed(spec.seed, "extra"), structured);
  return {std::move(rows), std::move(cols), std::move(extra)};
}

CurPlusModel cur_solve(const EntrySource& mtx, const CurPlusSpec& spec, const CurSamples& samples,
                       const EntrySource* row_estimate) {
  const std::size_t n = mtx.rows();
  const std::size_t m = mtx.cols();
  spec.validate(n, m);
  if (samples.cols.total_columns() != m || samples.extra.rows() != n || samples.extra.cols() != m)
    throw ShapeError("samples were drawn for a different frame");
  if (row_estimate && (row_estimate->rows() != n || row_estimate->cols() != m))
    throw ShapeError("row estimate has the wrong shape");
  const auto cols = samples.cols.indices();
  const std::size_t dc = cols.size();
  const std::size_t dr = samples.rows.size();

  std::vector<bool> is_col(m, false);
  for (std::size_t c : cols) is_col[c] = true;
  std::vector<bool> is_row(n, false);
  for (std::size_t i : samples.rows) {
    if (i >= n) throw IndexError("sampled row out of range");
    is_row[i] = true;
  }

  DenseMatrix c_block(n, dc);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < dc; ++k) c_block(i, k) = mtx.at(i, cols[k]);
  DenseMatrix r_block(dr, m);
  for (std::size_t k = 0; k < dr; ++k) {
    const std::size_t i = samples.rows[k];
    for (std::size_t j = 0; j < m; ++j) {
      if (is_col[j]) {
        r_block(k, j) = c_block(i, static_cast<std::size_t>(
                                       std::lower_bound(cols.begin(), cols.end(), j) - cols.begin()));
      } else {
        r_block(k, j) = row_estimate ? row_estimate->at(i, j) : mtx.at(i, j);
      }
    }
  }

  DenseMatrix u_hat = top_factors(c_block, spec.r, "sampled columns").u;
  DenseMatrix v_hat = top_factors(r_block, spec.r, "sampled rows").v();

  std::vector<ObservedEntry> observed;
  observed.reserve(n * dc + dr * m + samples.extra.size());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < dc; ++k) observed.push_back({i, cols[k], c_block(i, k)});
  for (std::size_t k = 0; k < dr; ++k)
    for (std::size_t j = 0; j < m; ++j)
      if (!is_col[j]) observed.push_back({samples.rows[k], j, r_block(k, j)});
  for (const auto& [i, j] : samples.extra.pairs()) {
    if (is_col[j] || is_row[i]) throw IndexError("extra entry overlaps the sampled rows or columns");
    observed.push_back({i, j, mtx.at(i, j)});
  }

  double value_sq = 0.0;
  for (const auto& e : observed) value_sq += e.value * e.value;
  const std::size_t budget = observed.size();
  const ObservedCoreObjective obj(u_hat, v_hat, std::move(observed));
  const double step = spec.step_size ? *spec.step_size : 1.0 / obj.lipschitz();
  const double tol = spec.grad_tol ? *spec.grad_tol : 1e-10 * std::sqrt(value_sq);
  DescentResult res = descend(obj, DenseMatrix(spec.r, spec.r), {step, spec.max_iters, tol});

  DenseMatrix m_hat = multiply_a_bt(u_hat * res.x, v_hat);
  return {std::move(u_hat), std::move(v_hat), std::move(res.x), std::move(m_hat), budget,
          res.iterations, std::move(res.trace), res.reason, step};
}

CurPlusModel cur_solve(const DenseMatrix& mtx, const CurPlusSpec& spec) {
  const CurSamples samples = draw_cur_samples(mtx.rows(), mtx.cols(), spec);
  return cur_solve(DenseEntrySource(mtx), spec, samples);
}

CurPlusSpec make_type(int variant, std::size_t n, std::size_t m, std::size_t d, std::size_t r,
                      std::uint64_t seed) {
  if (d < 1 || d > std::min(n, m)) throw ArgumentError("d must lie in [1, min(n, m)]");
  CurPlusSpec spec;
  spec.r = r;
  spec.seed = seed;
  spec.variant = variant;
  const std::size_t half = d / 2;
  switch (variant) {
    case 1:
      spec.d_rows = spec.d_cols = d;
      break;
    case 2:
    case 3:
      spec.d_rows = spec.d_cols = half;
      if (variant == 3) spec.extra_entries = half * half;
      if (d % 2 != 0) spec.note = "odd d=" + std::to_string(d) + " floored to d/2=" + std::to_string(half);
      break;
    default:
      throw ArgumentError("CUR+ type must be 1, 2 or 3");
  }
  if (spec.d_cols < r)
    throw RankError("CUR+ type " + std::to_string(variant) + " samples " + std::to_string(spec.d_cols) +
                    " columns, fewer than rank " + std::to_string(r));
  return spec;
}

std::size_t cur_budget(const CurPlusSpec& spec, std::size_t n, std::size_t m) {
  return spec.d_rows * m + n * spec.d_cols - spec.d_rows * spec.d_cols + spec.extra_entries;
}

double cur_error_bound(std::size_t m, std::size_t n, std::size_t d, std::size_t /*r*/,
                       double sigma_r_plus_1) {
  const double dm = static_cast<double>(m);
  const double dn = static_cast<double>(n);
  return 8.0 * sigma_r_plus_1 * sigma_r_plus_1 * (1.0 + 2.0 * dm * dn) *
         (1.0 + (dn + dm) / static_cast<double>(d));
}

}  // namespace colcomplete
