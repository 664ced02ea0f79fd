#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "colcomplete/matrix.hpp"
#include "colcomplete/polybasis.hpp"

namespace colcomplete {

enum class NoiseMode { DenseGaussian, RankK };

struct SyntheticSpec {
  std::size_t n = 1;
  std::size_t m = 1;
  int degree = 0;
  std::vector<double> grid;  // empty: default_grid(m)
  std::uint64_t q_seed = 0;
  double noise_sigma = 0.0;
  std::uint64_t noise_seed = 0;
  NoiseMode noise_mode = NoiseMode::DenseGaussian;
  std::size_t k = 0;  // rank of E in RankK mode

  // Throws ArgumentError.
  void validate() const;
};

struct Instance {
  DenseMatrix m_true;
  DenseMatrix q_true;
  PolyBasis s;
  DenseMatrix e_true;
  SyntheticSpec spec;
};

// Q ~ N(0, 1) from stream (q_seed, "Q"). E from stream (noise_seed, "E"):
// i.i.d. N(0, sigma^2) entries, or in RankK mode U_k R V_k^T with U_k, V_k
// the leading singular vectors of QS and R a k x k N(0, sigma^2) matrix.
Instance generate(const SyntheticSpec& spec);

}  // namespace colcomplete
