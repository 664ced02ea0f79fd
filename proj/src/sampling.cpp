#include "colcomplete/sampling.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "colcomplete/errors.hpp"
#include "colcomplete/rng.hpp"

namespace colcomplete {

ColumnSampler build_sampler(std::size_t m, std::vector<std::size_t> indices) {
  if (indices.empty()) throw IndexError("column sampler needs at least one index");
  std::sort(indices.begin(), indices.end());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (indices[k] >= m) {
      throw IndexError("column index " + std::to_string(indices[k]) + " out of range for m=" +
                       std::to_string(m));
    }
    if (k > 0 && indices[k] == indices[k - 1]) {
      throw IndexError("duplicate column index " + std::to_string(indices[k]));
    }
  }
  return ColumnSampler(m, std::move(indices));
}

DenseMatrix ColumnSampler::selector() const {
  DenseMatrix psi(m_, indices_.size());
  for (std::size_t j = 0; j < indices_.size(); ++j) psi(indices_[j], j) = 1.0;
  return psi;
}

DenseMatrix sample_columns(const DenseMatrix& mtx, const ColumnSampler& s) {
  if (mtx.cols() != s.total_columns()) {
    throw ShapeError("matrix has " + std::to_string(mtx.cols()) + " columns, sampler expects " +
                     std::to_string(s.total_columns()));
  }
  return mtx.gather_columns(s.indices());
}

std::vector<std::size_t> random_permutation(std::size_t m, std::uint64_t seed) {
  std::vector<std::size_t> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng = Rng::stream(seed, "permutation");
  for (std::size_t i = 0; i + 1 < m; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(m - i));
    std::swap(perm[i], perm[j]);
  }
  return perm;
}

ColumnSampler sampler_from_prefix(std::size_t m, std::span<const std::size_t> permutation,
                                  std::size_t d) {
  if (d < 1 || d > permutation.size()) {
    throw IndexError("prefix length " + std::to_string(d) + " outside [1, " +
                     std::to_string(permutation.size()) + "]");
  }
  return build_sampler(m, std::vector<std::size_t>(permutation.begin(), permutation.begin() + d));
}

ColumnSampler sample_uniform(std::size_t m, std::size_t d, std::uint64_t seed) {
  if (d < 1 || d > m) {
    throw IndexError("cannot sample " + std::to_string(d) + " of " + std::to_string(m) +
                     " columns");
  }
  const auto perm = random_permutation(m, seed);
  return sampler_from_prefix(m, perm, d);
}

EntryIndexSet::EntryIndexSet(std::size_t n, std::size_t m, std::vector<Entry> pairs)
    : n_(n), m_(m), pairs_(std::move(pairs)) {
  std::sort(pairs_.begin(), pairs_.end());
  for (std::size_t k = 0; k < pairs_.size(); ++k) {
    const auto [i, j] = pairs_[k];
    if (i >= n_ || j >= m_) {
      throw IndexError("entry (" + std::to_string(i) + ", " + std::to_string(j) +
                       ") outside frame");
    }
    if (k > 0 && pairs_[k] == pairs_[k - 1]) {
      throw IndexError("duplicate entry (" + std::to_string(i) + ", " + std::to_string(j) + ")");
    }
  }
}

bool EntryIndexSet::contains(std::size_t i, std::size_t j) const {
  return std::binary_search(pairs_.begin(), pairs_.end(), Entry{i, j});
}

EntryIndexSet EntryIndexSet::merged(const EntryIndexSet& other) const {
  if (other.n_ != n_ || other.m_ != m_) throw ShapeError("entry sets have different frames");
  std::vector<Entry> out;
  out.reserve(pairs_.size() + other.pairs_.size());
  std::set_union(pairs_.begin(), pairs_.end(), other.pairs_.begin(), other.pairs_.end(),
                 std::back_inserter(out));
  EntryIndexSet result(n_, m_);
  result.pairs_ = std::move(out);
  return result;
}

EntryIndexSet omega_of_columns(std::size_t n, const ColumnSampler& s) {
  std::vector<Entry> pairs;
  pairs.reserve(n * s.count());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c : s.indices()) pairs.emplace_back(i, c);
  return EntryIndexSet(n, s.total_columns(), std::move(pairs));
}

EntryIndexSet omega_of_rows(std::span<const std::size_t> rows, std::size_t n, std::size_t m) {
  std::vector<Entry> pairs;
  pairs.reserve(rows.size() * m);
  for (std::size_t i : rows)
    for (std::size_t j = 0; j < m; ++j) pairs.emplace_back(i, j);
  return EntryIndexSet(n, m, std::move(pairs));
}

EntryIndexSet sample_entries_uniform(std::size_t n, std::size_t m, std::size_t count,
                                     std::uint64_t seed, const EntryIndexSet& exclude) {
  if (exclude.rows() != n || exclude.cols() != m) throw ShapeError("exclude set frame mismatch");
  std::vector<std::size_t> candidates;
  candidates.reserve(n * m - exclude.size());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (!exclude.contains(i, j)) candidates.push_back(i * m + j);
  if (count > candidates.size()) {
    throw IndexError("requested " + std::to_string(count) + " entries but only " +
                     std::to_string(candidates.size()) + " are available");
  }
  Rng rng = Rng::stream(seed, "entries");
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t pick = k + static_cast<std::size_t>(rng.below(candidates.size() - k));
    std::swap(candidates[k], candidates[pick]);
  }
  std::vector<Entry> pairs;
  pairs.reserve(count);
  for (std::size_t k = 0; k < count; ++k) pairs.emplace_back(candidates[k] / m, candidates[k] % m);
  return EntryIndexSet(n, m, std::move(pairs));
}

}  // namespace colcomplete
