#pragma once

/// \file grid.hpp
/// \brief Uniform periodic lattice standing in for R^d at desk scale (d in {1,2}).
///
/// The grid carries spacing, half-extent and the Fourier wavenumber table.
/// Nodes along one axis sit at x_j = -L + j*h with h = 2L/n; the box is
/// [-L, L)^d with periodic wrap. Fields are flat std::vector<double> of
/// length n^d, row-major in d=2 (idx = iy*n + ix).

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "fpme/fft.hpp"

namespace fpme {

using Field = std::vector<double>;

struct Grid {
  int d = 1;           ///< dimension, 1 or 2
  std::size_t n = 0;   ///< points per axis (power of two, >= 8)
  double L = 0.0;      ///< half-extent of the box [-L, L)
  double h = 0.0;      ///< spacing 2L/n
  Field freq;          ///< signed wavenumber per axis mode: k_j = (pi/L)*j_signed

  std::size_t size() const { return d == 1 ? n : n * n; }
  double cellvol() const { return d == 1 ? h : h * h; }

  /// Coordinate of axis node j.
  double axis_coord(std::size_t j) const { return -L + h * double(j); }

  /// Coordinate of flattened node idx along the given axis (0 = x, 1 = y).
  double node_coord(std::size_t idx, int axis) const {
    if (d == 1) return axis_coord(idx);
    return axis == 0 ? axis_coord(idx % n) : axis_coord(idx / n);
  }

  /// Euclidean distance of node idx from the origin.
  double node_radius(std::size_t idx) const {
    if (d == 1) return std::abs(axis_coord(idx));
    const double x = node_coord(idx, 0), y = node_coord(idx, 1);
    return std::hypot(x, y);
  }

  std::size_t index_of(std::size_t ix, std::size_t iy = 0) const {
    return d == 1 ? ix : iy * n + ix;
  }
};

inline Grid make_grid(int d, std::size_t n, double L) {
  if (d != 1 && d != 2) throw std::invalid_argument("grid: dimension must be 1 or 2");
  if (n < 8) throw std::invalid_argument("grid: need n >= 8 points per axis");
  if (!is_power_of_two(n)) throw std::invalid_argument("grid: n must be a power of two");
  if (!(L > 0.0)) throw std::invalid_argument("grid: half-extent L must be positive");
  Grid g;
  g.d = d;
  g.n = n;
  g.L = L;
  g.h = 2.0 * L / double(n);
  g.freq.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double signed_j = (j <= n / 2) ? double(j) : double(j) - double(n);
    g.freq[j] = (kPi / L) * signed_j;
  }
  g.freq[0] = 0.0;  // exact by construction, reasserted for clarity
  return g;
}

/// Plain (unweighted) integral of a field: sum * cell volume.
inline double integrate(const Field& f, const Grid& g) {
  double s = 0.0;
  for (double v : f) s += v;
  return s * g.cellvol();
}

/// Plain L^2 inner product <f, g> = sum f*g * cellvol.
inline double inner(const Field& a, const Field& b, const Grid& g) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s * g.cellvol();
}

inline bool all_finite(const Field& f) {
  for (double v : f)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace fpme
