#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "colcomplete/matrix.hpp"

namespace colcomplete {

// Portable seeded generator. The engine is std::mt19937_64, whose output
// sequence is fixed by the C++ standard; uniform, normal and bounded-integer
// draws are computed here so that streams are identical across standard
// library implementations.
//
// Independent streams are derived from (seed, tag) with splitmix64 mixing, so
// e.g. the Q and E draws of one instance never share state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng stream(std::uint64_t seed, std::string_view tag) { return Rng(derive_seed(seed, tag)); }

  static std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag);
  static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

  std::uint64_t next_u64() { return engine_(); }
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Standard normal (Marsaglia polar method, spare value cached).
  double normal();
  // Uniform integer in [0, bound) by rejection; bound > 0.
  std::uint64_t below(std::uint64_t bound);

  DenseMatrix gaussian_matrix(std::size_t rows, std::size_t cols, double stddev = 1.0);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace colcomplete
