#pragma once

/// \file sampling.hpp
/// \brief Seeded field samplers for the randomized inequality sweeps.
///
/// Both samplers are pure functions of (grid, seed) so that every randomized
/// bank in reports and CLI outputs is reproducible byte for byte.

#include <cmath>
#include <random>

#include "fpme/grid.hpp"

namespace fpme {

/// Smooth strictly positive field: a handful of low Fourier modes per axis,
/// rescaled into [0.25, 1.25]. Suitable where differentiability matters
/// (spectral-operator sweeps).
inline Field smooth_positive_field(const Grid& g, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  Field f(g.size(), 0.0);
  const int modes = 4;
  for (int axis = 0; axis < g.d; ++axis) {
    for (int k = 1; k <= modes; ++k) {
      const double a = amp(rng) / double(k);
      const double p = phase(rng);
      const double w = kPi * double(k) / g.L;
      for (std::size_t i = 0; i < g.size(); ++i)
        f[i] += a * std::cos(w * g.node_coord(i, axis) + p);
    }
  }
  double sup = 0.0;
  for (double v : f) sup = std::max(sup, std::abs(v));
  const double scale = sup > 0.0 ? 0.5 / sup : 0.0;
  for (double& v : f) v = 0.75 + scale * v;
  return f;
}

/// Rough nonnegative field: node-wise uniform noise clipped at zero, so it
/// carries kinks and flat dead zones. Suitable for positivity-structure
/// sweeps (quadrature-operator inequalities).
inline Field rough_nonneg_field(const Grid& g, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-0.25, 1.0);
  Field f(g.size());
  for (double& v : f) v = std::max(0.0, u(rng));
  return f;
}

}  // namespace fpme
