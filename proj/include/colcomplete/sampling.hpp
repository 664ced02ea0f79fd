#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "colcomplete/matrix.hpp"

namespace colcomplete {

// Ordered column index set C within [0, m) and the selector matrix it induces.
class ColumnSampler {
 public:
  std::size_t total_columns() const noexcept { return m_; }
  std::size_t count() const noexcept { return indices_.size(); }
  std::span<const std::size_t> indices() const noexcept { return indices_; }

  // Psi in {0,1}^{m x d} with Psi(c_j, j) = 1. Only for tests and small m;
  // sample_columns never forms it.
  DenseMatrix selector() const;

  bool operator==(const ColumnSampler&) const = default;

 private:
  friend ColumnSampler build_sampler(std::size_t m, std::vector<std::size_t> indices);
  ColumnSampler(std::size_t m, std::vector<std::size_t> indices)
      : m_(m), indices_(std::move(indices)) {}

  std::size_t m_;
  std::vector<std::size_t> indices_;
};

// Indices are 0-based and stored in increasing order. Throws IndexError on an
// empty list, a duplicate, or an index >= m.
ColumnSampler build_sampler(std::size_t m, std::vector<std::size_t> indices);

// Gathers the sampled columns (equal to mtx * Psi). Throws ShapeError when
// mtx.cols() != s.total_columns().
DenseMatrix sample_columns(const DenseMatrix& mtx, const ColumnSampler& s);

// Uniform random permutation of [0, m) (Fisher-Yates, seed-deterministic).
std::vector<std::size_t> random_permutation(std::size_t m, std::uint64_t seed);

// Sampler over the first d entries of a permutation; nested in d.
ColumnSampler sampler_from_prefix(std::size_t m, std::span<const std::size_t> permutation,
                                  std::size_t d);

// d distinct columns uniformly without replacement. Throws IndexError unless
// 1 <= d <= m.
ColumnSampler sample_uniform(std::size_t m, std::size_t d, std::uint64_t seed);

using Entry = std::pair<std::size_t, std::size_t>;

// Set of (row, col) coordinates inside an n x m frame, kept sorted and unique.
class EntryIndexSet {
 public:
  EntryIndexSet(std::size_t n, std::size_t m) : n_(n), m_(m) {}
  // Throws IndexError on out-of-range or duplicate coordinates.
  EntryIndexSet(std::size_t n, std::size_t m, std::vector<Entry> pairs);

  std::size_t rows() const noexcept { return n_; }
  std::size_t cols() const noexcept { return m_; }
  std::size_t size() const noexcept { return pairs_.size(); }
  bool empty() const noexcept { return pairs_.empty(); }
  std::span<const Entry> pairs() const noexcept { return pairs_; }
  bool contains(std::size_t i, std::size_t j) const;

  // Set union; frames must match.
  EntryIndexSet merged(const EntryIndexSet& other) const;

 private:
  std::size_t n_;
  std::size_t m_;
  std::vector<Entry> pairs_;
};

// { (i, c) : i in [n], c in C }, |Omega| = n d.
EntryIndexSet omega_of_columns(std::size_t n, const ColumnSampler& s);

// { (i, j) : i in rows, j in [m] }.
EntryIndexSet omega_of_rows(std::span<const std::size_t> rows, std::size_t n, std::size_t m);

// `count` distinct entries outside `exclude`, uniform, seed-deterministic.
// Throws IndexError when fewer than `count` entries are available.
EntryIndexSet sample_entries_uniform(std::size_t n, std::size_t m, std::size_t count,
                                     std::uint64_t seed, const EntryIndexSet& exclude);

}  // namespace colcomplete
