#pragma once

/// \file measures.hpp
/// \brief Positive finite Radon measures (atoms + density), mollification of
///        measure data, and the weak-star gap against a test-function bank.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "fpme/fft.hpp"
#include "fpme/grid.hpp"

namespace fpme {

struct Atom {
  double x = 0.0;     ///< first coordinate
  double y = 0.0;     ///< second coordinate (ignored in d=1)
  double mass = 0.0;  ///< strictly positive
};

/// A positive finite Radon measure restricted to numerical reach:
/// finitely many atoms plus an absolutely continuous part sampled on the grid.
struct MeasureSpec {
  std::vector<Atom> atoms;
  Field density;  ///< nonnegative; empty means zero density part

  double total_mass(const Grid& g) const {
    double m = 0.0;
    for (const auto& a : atoms) m += a.mass;
    if (!density.empty()) m += integrate(density, g);
    return m;
  }

  void validate(const Grid& g) const {
    for (const auto& a : atoms)
      if (!(a.mass > 0.0)) throw std::invalid_argument("measure: atom masses must be positive");
    if (!density.empty()) {
      if (density.size() != g.size())
        throw std::invalid_argument("measure: density field does not match the grid");
      for (double v : density)
        if (!(v >= 0.0)) throw std::invalid_argument("measure: density must be nonnegative");
    }
    if (!(total_mass(g) > 0.0) && !atoms.empty())
      throw std::invalid_argument("measure: total mass must be positive");
  }
};

/// Smooth compactly supported bump profile exp(-1/(1-r^2)) on r < 1.
inline double bump_profile(double r) {
  const double r2 = r * r;
  if (r2 >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - r2));
}

struct Mollifier {
  double eps = 0.1;  ///< scale; the bump psi_eps is supported on radius eps
};

namespace detail {

/// Minimal periodic displacement between coordinates a and b in [-L, L).
inline double periodic_delta(double a, double b, double L) {
  double d = a - b;
  const double span = 2.0 * L;
  d -= span * std::round(d / span);
  return d;
}

/// Discretely normalized bump kernel centered at `center` with unit discrete
/// mass; exact normalization makes mollification conserve mass to rounding.
inline Field normalized_bump(const Grid& g, double cx, double cy, double eps) {
  Field k(g.size(), 0.0);
  double acc = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double dx = periodic_delta(g.node_coord(i, 0), cx, g.L);
    double r2 = dx * dx;
    if (g.d == 2) {
      const double dy = periodic_delta(g.node_coord(i, 1), cy, g.L);
      r2 += dy * dy;
    }
    k[i] = bump_profile(std::sqrt(r2) / eps);
    acc += k[i];
  }
  if (!(acc > 0.0)) throw std::invalid_argument("mollifier: bump not resolved on the grid");
  const double scale = 1.0 / (acc * g.cellvol());
  for (auto& v : k) v *= scale;
  return k;
}

}  // namespace detail

/// Density of mu_eps = psi_eps * mu. Atoms become discretely normalized bumps
/// (mass exact to rounding); the density part is convolved with the same
/// normalized kernel via FFT, which preserves its discrete integral exactly
/// through the zero mode.
inline Field mollify_measure(const MeasureSpec& mu, const Mollifier& moll, const Grid& g) {
  mu.validate(g);
  if (!(moll.eps >= 2.0 * g.h))
    throw std::invalid_argument("mollifier: eps must be at least 2*spacing to be resolvable");

  Field out(g.size(), 0.0);
  for (const auto& a : mu.atoms) {
    const double rad = (g.d == 1) ? std::abs(a.x) : std::hypot(a.x, a.y);
    if (rad + moll.eps > g.L)
      throw std::invalid_argument("mollifier: atom bump support must fit inside the box");
    const auto k = detail::normalized_bump(g, a.x, a.y, moll.eps);
    for (std::size_t i = 0; i < g.size(); ++i) out[i] += a.mass * k[i];
  }

  if (!mu.density.empty()) {
    // kernel centered at node 0 (coordinate -L) so the circular convolution
    // keeps node alignment
    const auto k = detail::normalized_bump(g, -g.L, -g.L, moll.eps);
    std::vector<cd> fk(g.size()), fd(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      fk[i] = cd(k[i], 0.0);
      fd[i] = cd(mu.density[i], 0.0);
    }
    if (g.d == 1) {
      fft_inplace(fk, false);
      fft_inplace(fd, false);
      for (std::size_t i = 0; i < g.size(); ++i) fd[i] *= fk[i];
      fft_inplace(fd, true);
    } else {
      fft_2d_inplace(fk, g.n, false);
      fft_2d_inplace(fd, g.n, false);
      for (std::size_t i = 0; i < g.size(); ++i) fd[i] *= fk[i];
      fft_2d_inplace(fd, g.n, true);
    }
    for (std::size_t i = 0; i < g.size(); ++i) out[i] += fd[i].real() * g.cellvol();
  }

  for (auto& v : out) v = std::max(v, 0.0);  // clear FFT rounding dust
  return out;
}

/// Integral of a grid test function against a measure; atoms are evaluated by
/// (bi)linear interpolation of the test field at the atom location.
inline double integrate_against(const Field& phi, const MeasureSpec& mu, const Grid& g) {
  double acc = 0.0;
  if (!mu.density.empty()) {
    for (std::size_t i = 0; i < g.size(); ++i) acc += phi[i] * mu.density[i];
    acc *= g.cellvol();
  }
  for (const auto& a : mu.atoms) {
    const auto wrap = [&](double fl) {
      const long long il = std::llround(fl);
      const long long nn = static_cast<long long>(g.n);
      return static_cast<std::size_t>(((il % nn) + nn) % nn);
    };
    if (g.d == 1) {
      const double t = (a.x + g.L) / g.h;
      const double fl = std::floor(t);
      const std::size_t i0 = wrap(fl);
      const std::size_t i1 = (i0 + 1) % g.n;
      const double w = t - fl;
      acc += a.mass * ((1.0 - w) * phi[i0] + w * phi[i1]);
    } else {
      const double tx = (a.x + g.L) / g.h, ty = (a.y + g.L) / g.h;
      const double fx = std::floor(tx), fy = std::floor(ty);
      const std::size_t ix = wrap(fx);
      const std::size_t iy = wrap(fy);
      const std::size_t jx = (ix + 1) % g.n, jy = (iy + 1) % g.n;
      const double wx = tx - fx, wy = ty - fy;
      acc += a.mass * ((1.0 - wx) * (1.0 - wy) * phi[g.index_of(ix, iy)] +
                       wx * (1.0 - wy) * phi[g.index_of(jx, iy)] +
                       (1.0 - wx) * wy * phi[g.index_of(ix, jy)] +
                       wx * wy * phi[g.index_of(jx, jy)]);
    }
  }
  return acc;
}

/// Max over the bank of |integral against mu - integral against nu|; a
/// numerical witness for weak-star convergence of measures.
inline double weakstar_gap(const MeasureSpec& mu, const MeasureSpec& nu,
                           const std::vector<Field>& bank, const Grid& g) {
  if (bank.empty()) throw std::invalid_argument("weakstar_gap: test bank must be nonempty");
  double gap = 0.0;
  for (const auto& phi : bank) {
    gap = std::max(gap, std::abs(integrate_against(phi, mu, g) - integrate_against(phi, nu, g)));
  }
  return gap;
}

/// Default weak-star test bank: the constant 1, Gaussians at 8 centers and 3
/// widths (periodic displacement keeps them continuous across the wrap), and
/// per-axis coordinate ramps clipped to [-L/2, L/2].
inline std::vector<Field> default_test_bank(const Grid& g) {
  std::vector<Field> bank;
  bank.emplace_back(g.size(), 1.0);

  const int n_centers = 8;
  const double widths[3] = {g.L / 16.0, g.L / 8.0, g.L / 4.0};
  for (int ci = 0; ci < n_centers; ++ci) {
    const double cx = -g.L + (2.0 * g.L / n_centers) * ci;
    for (double w : widths) {
      Field phi(g.size());
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double dx = detail::periodic_delta(g.node_coord(i, 0), cx, g.L);
        double r2 = dx * dx;
        if (g.d == 2) {
          const double dy = detail::periodic_delta(g.node_coord(i, 1), cx, g.L);
          r2 += dy * dy;
        }
        phi[i] = std::exp(-r2 / (2.0 * w * w));
      }
      bank.push_back(std::move(phi));
    }
  }

  for (int axis = 0; axis < g.d; ++axis) {
    Field ramp(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
      ramp[i] = std::clamp(g.node_coord(i, axis), -g.L / 2.0, g.L / 2.0);
    bank.push_back(std::move(ramp));
  }
  return bank;
}

}  // namespace fpme
