#pragma once

/// \file helpers.hpp
/// \brief Shared test utilities: seeded smooth random fields on a grid.

#include <cmath>
#include <random>
#include <vector>

#include "fpme/fft.hpp"
#include "fpme/grid.hpp"

namespace testutil {

/// Smooth random field: Gaussian Fourier coefficients damped by
/// exp(-(k/k_cut)^2), transformed back and normalized to unit sup norm.
inline fpme::Field random_smooth_field(const fpme::Grid& g, unsigned seed, double k_cut = 8.0) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<fpme::cd> modes(g.size(), fpme::cd(0.0, 0.0));
  if (g.d == 1) {
    for (std::size_t j = 0; j < g.n; ++j) {
      const double damp = std::exp(-std::pow(g.freq[j] / (k_cut * fpme::kPi / g.L), 2.0));
      modes[j] = fpme::cd(gauss(rng), gauss(rng)) * damp;
    }
    fpme::fft_inplace(modes, true);
  } else {
    for (std::size_t iy = 0; iy < g.n; ++iy)
      for (std::size_t ix = 0; ix < g.n; ++ix) {
        const double k2 = g.freq[ix] * g.freq[ix] + g.freq[iy] * g.freq[iy];
        const double kc = k_cut * fpme::kPi / g.L;
        modes[iy * g.n + ix] = fpme::cd(gauss(rng), gauss(rng)) * std::exp(-k2 / (kc * kc));
      }
    fpme::fft_2d_inplace(modes, g.n, true);
  }
  fpme::Field f(g.size());
  double sup = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    f[i] = modes[i].real();
    sup = std::max(sup, std::abs(f[i]));
  }
  if (sup > 0.0)
    for (auto& v : f) v /= sup;
  return f;
}

/// Nonnegative variant: |field| of the above (still continuous, piecewise smooth).
inline fpme::Field random_nonneg_field(const fpme::Grid& g, unsigned seed, double k_cut = 8.0) {
  auto f = random_smooth_field(g, seed, k_cut);
  for (auto& v : f) v = std::abs(v);
  return f;
}

}  // namespace testutil
