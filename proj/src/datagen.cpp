#include "colcomplete/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "colcomplete/errors.hpp"
#include "colcomplete/rng.hpp"
#include "colcomplete/svd.hpp"

namespace colcomplete {

void SyntheticSpec::validate() const {
  if (n < 1 || m < 1) throw ArgumentError("instance dimensions must be >= 1");
  if (degree < 0) throw ArgumentError("degree must be >= 0");
  if (!grid.empty() && grid.size() != m)
    throw ArgumentError("grid has " + std::to_string(grid.size()) + " points, expected m=" +
                        std::to_string(m));
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) throw ArgumentError("noise sigma must be >= 0");
  if (noise_mode == NoiseMode::RankK && (k < 1 || k > std::min(n, m)))
    throw ArgumentError("noise rank k must lie in [1, min(n, m)]");
}

Instance generate(const SyntheticSpec& spec) {
  spec.validate();
  PolyBasis basis = build_basis(spec.grid.empty() ? default_grid(spec.m) : spec.grid, spec.degree);
  Rng q_rng = Rng::stream(spec.q_seed, "Q");
  DenseMatrix q = q_rng.gaussian_matrix(spec.n, basis.rows());
  const DenseMatrix qs = q * basis.matrix();

  Rng e_rng = Rng::stream(spec.noise_seed, "E");
  DenseMatrix e(spec.n, spec.m);
  if (spec.noise_sigma > 0.0) {
    if (spec.noise_mode == NoiseMode::DenseGaussian) {
      e = e_rng.gaussian_matrix(spec.n, spec.m, spec.noise_sigma);
    } else {
      const SvdFactors f = svd_full(qs);
      const DenseMatrix r = e_rng.gaussian_matrix(spec.k, spec.k, spec.noise_sigma);
      e = multiply_a_bt(f.u.columns(0, spec.k) * r, f.v().columns(0, spec.k));
    }
  }
  DenseMatrix mtx = qs + e;
  return {std::move(mtx), std::move(q), std::move(basis), std::move(e), spec};
}

}  // namespace colcomplete
