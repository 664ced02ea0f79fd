#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "colcomplete/matrix.hpp"
#include "colcomplete/regression.hpp"
#include "colcomplete/sampling.hpp"

namespace colcomplete {

// Read-only entry access. cur_solve reads the data only through this
// interface, one entry at a time.
class EntrySource {
 public:
  virtual ~EntrySource() = default;
  virtual std::size_t rows() const = 0;
  virtual std::size_t cols() const = 0;
  virtual double at(std::size_t i, std::size_t j) const = 0;
};

class DenseEntrySource final : public EntrySource {
 public:
  explicit DenseEntrySource(const DenseMatrix& m) : m_(m) {}
  std::size_t rows() const override { return m_.rows(); }
  std::size_t cols() const override { return m_.cols(); }
  double at(std::size_t i, std::size_t j) const override { return m_(i, j); }

 private:
  const DenseMatrix& m_;
};

struct CurPlusSpec {
  std::size_t d_rows = 0;
  std::size_t d_cols = 0;
  std::size_t extra_entries = 0;
  std::size_t r = 1;
  std::uint64_t seed = 0;
  std::optional<double> step_size;  // unset: 1 / lambda_max of the core Hessian
  std::size_t max_iters = 5000;
  std::optional<double> grad_tol;   // unset: 1e-10 * ||observed values||
  int variant = 0;                  // 1, 2 or 3 for the standard types, 0 otherwise
  std::string note;

  // Throws ArgumentError/IndexError/RankError for an infeasible spec on an n x m frame.
  void validate(std::size_t n, std::size_t m) const;
};

struct CurSamples {
  std::vector<std::size_t> rows;  // sorted
  ColumnSampler cols;
  EntryIndexSet extra;
};

// Columns: first d_cols of random_permutation(m, seed), so a column sampler
// drawn with sample_uniform(m, d, seed) nests with them. Rows and extra
// entries come from streams derived from the same seed.
CurSamples draw_cur_samples(std::size_t n, std::size_t m, const CurPlusSpec& spec);

struct CurPlusModel {
  DenseMatrix u_hat;  // n x r
  DenseMatrix v_hat;  // m x r
  DenseMatrix z_hat;  // r x r
  DenseMatrix m_hat;  // n x m
  std::size_t sample_budget = 0;
  std::size_t iters = 0;
  std::vector<double> trace;
  StopReason stop = StopReason::MaxIterations;
  double step = 0.0;
};

// Fits the core over every observed entry (sampled rows, sampled columns and
// extra entries). With row_estimate set, sampled-row entries outside the
// sampled columns are taken from it instead of from mtx.
CurPlusModel cur_solve(const EntrySource& mtx, const CurPlusSpec& spec, const CurSamples& samples,
                       const EntrySource* row_estimate = nullptr);
CurPlusModel cur_solve(const DenseMatrix& mtx, const CurPlusSpec& spec);

// variant 1 -> (d, d, 0), 2 -> (d/2, d/2, 0), 3 -> (d/2, d/2, (d/2)^2).
// Odd d is floored and noted in spec.note. Throws RankError when the row or
// column count falls below r.
CurPlusSpec make_type(int variant, std::size_t n, std::size_t m, std::size_t d, std::size_t r,
                      std::uint64_t seed);

// d_rows m + n d_cols - d_rows d_cols + extra; overlap counted once.
std::size_t cur_budget(const CurPlusSpec& spec, std::size_t n, std::size_t m);

// 8 sigma_{r+1}^2 (1 + 2 m n) (1 + (n + m) / d).
double cur_error_bound(std::size_t m, std::size_t n, std::size_t d, std::size_t r,
                       double sigma_r_plus_1);

}  // namespace colcomplete
