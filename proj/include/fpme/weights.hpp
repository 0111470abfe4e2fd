#pragma once

/// \file weights.hpp
/// \brief Weights rho with singularity/decay exponents, their regularization,
///        the theorem-hypothesis validator, and weighted Lebesgue norms.
///
/// The admissible weights behave like |x|^-gamma0 inside the unit ball and
/// |x|^-gamma outside, pinched between c and C times those powers. Profiles:
///   - PurePower:   exactly |x|^-gamma0 inside B_1 and |x|^-gamma outside
///                  (continuous across |x| = 1, coefficient 1);
///   - TwoRegime:   C|x|^-gamma0 inside, c|x|^-gamma outside (bounded, possibly
///                  discontinuous — the hypotheses only ask for measurability);
///   - Regularized: the pure-power profile with the singularity capped at
///                  radius eta; continuous, strictly positive, <= rho, and
///                  increasing to rho monotonically as eta decreases.
///
/// The node at the origin is evaluated by cell-averaging the profile over its
/// cell (finite because gamma0 < d); in d=1 the average is analytic.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "fpme/grid.hpp"

namespace fpme {

inline constexpr double kInfP = std::numeric_limits<double>::infinity();

enum class WeightProfile { PurePower, TwoRegime, Regularized };

inline std::string to_string(WeightProfile p) {
  switch (p) {
    case WeightProfile::PurePower: return "pure_power";
    case WeightProfile::TwoRegime: return "two_regime";
    case WeightProfile::Regularized: return "regularized";
  }
  return "unknown";
}

inline WeightProfile weight_profile_from_string(const std::string& s) {
  if (s == "pure_power") return WeightProfile::PurePower;
  if (s == "two_regime") return WeightProfile::TwoRegime;
  if (s == "regularized") return WeightProfile::Regularized;
  throw std::invalid_argument("unknown weight profile: " + s);
}

struct WeightSpec {
  double gamma0 = 0.0;  ///< inner exponent, in [0, gamma]
  double gamma = 0.0;   ///< outer exponent, in [0, 2s) and [0, d-2s]
  double c = 1.0;       ///< lower band coefficient, 0 < c <= C
  double C = 1.0;       ///< upper band coefficient
  WeightProfile profile = WeightProfile::PurePower;
  double eta = 0.0;     ///< regularization level (Regularized profile only)
};

/// Throws std::invalid_argument naming the violated hypothesis clause.
/// The clause strings are stable API: the CLI forwards them verbatim on exit 2.
inline void validate_weight_hypotheses(const WeightSpec& w, int d, double s) {
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("hypothesis violated: s in (0, 1)");
  if (!(double(d) > 2.0 * s))
    throw std::invalid_argument("hypothesis violated: d > 2s (d=" + std::to_string(d) +
                                ", s=" + std::to_string(s) + ")");
  if (!(w.gamma >= 0.0 && w.gamma < 2.0 * s))
    throw std::invalid_argument("hypothesis violated: gamma in [0, 2s) (gamma=" +
                                std::to_string(w.gamma) + ", 2s=" + std::to_string(2.0 * s) + ")");
  // closed upper boundary; 1e-12 slack absorbs rounding of d - 2s
  if (!(w.gamma <= double(d) - 2.0 * s + 1e-12))
    throw std::invalid_argument("hypothesis violated: gamma in [0, d-2s] (gamma=" +
                                std::to_string(w.gamma) +
                                ", d-2s=" + std::to_string(double(d) - 2.0 * s) + ")");
  if (!(w.gamma0 >= 0.0 && w.gamma0 <= w.gamma))
    throw std::invalid_argument("hypothesis violated: gamma0 in [0, gamma] (gamma0=" +
                                std::to_string(w.gamma0) + ", gamma=" + std::to_string(w.gamma) +
                                ")");
  if (!(0.0 < w.c && w.c <= w.C))
    throw std::invalid_argument("hypothesis violated: 0 < c <= C");
  if (w.profile == WeightProfile::Regularized && !(w.eta >= 0.0))
    throw std::invalid_argument("hypothesis violated: eta >= 0");
}

namespace detail {

/// Radial profile value away from the origin.
inline double weight_at_radius(const WeightSpec& w, double r) {
  const bool inner = r <= 1.0;
  const double ex = inner ? w.gamma0 : w.gamma;
  double coef = 1.0;
  if (w.profile == WeightProfile::TwoRegime) coef = inner ? w.C : w.c;
  double rr = r;
  if (w.profile == WeightProfile::Regularized && inner) rr = std::max(r, w.eta);
  return coef * std::pow(rr, -ex);
}

/// Analytic cell average of the d=1 profile over the origin cell [-h/2, h/2].
inline double origin_average_1d(const WeightSpec& w, double h) {
  const double g0 = w.gamma0;
  double coef = 1.0;
  if (w.profile == WeightProfile::TwoRegime) coef = w.C;
  const double half = h / 2.0;
  if (g0 == 0.0) return coef;
  if (w.profile == WeightProfile::Regularized && w.eta > 0.0) {
    const double eta = std::min(w.eta, half);
    // integral of max(r, eta)^-g0 over [0, half], then averaged over the cell
    const double integral =
        eta * std::pow(eta, -g0) +
        (std::pow(half, 1.0 - g0) - std::pow(eta, 1.0 - g0)) / (1.0 - g0);
    double v = coef * integral / half;
    if (w.eta >= half) v = coef * std::pow(w.eta, -g0);
    return v;
  }
  return coef * std::pow(half, -g0) / (1.0 - g0);
}

/// Numeric cell average over the 2-d origin cell (midpoint subsampling; the
/// quadrature points never hit r = 0, and gamma0 < d keeps the average finite).
inline double origin_average_2d(const WeightSpec& w, double h) {
  const int k = 256;
  const double sub = h / double(k);
  double acc = 0.0;
  for (int i = 0; i < k; ++i) {
    const double x = -h / 2.0 + (double(i) + 0.5) * sub;
    for (int j = 0; j < k; ++j) {
      const double y = -h / 2.0 + (double(j) + 0.5) * sub;
      acc += weight_at_radius(w, std::hypot(x, y));
    }
  }
  return acc / double(k) / double(k);
}

}  // namespace detail

/// Samples rho at the grid nodes; the origin node is cell-averaged.
inline Field eval_weight(const WeightSpec& w, const Grid& g) {
  Field rho(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double r = g.node_radius(i);
    if (r < g.h * 1e-12) {
      rho[i] = (g.d == 1) ? detail::origin_average_1d(w, g.h) : detail::origin_average_2d(w, g.h);
    } else {
      rho[i] = detail::weight_at_radius(w, r);
    }
  }
  return rho;
}

/// Weighted L^p norm: (sum |f|^p * rho * cellvol)^(1/p). p = kInfP returns the
/// grid max of |f| with the weight ignored (the L^infinity of the unweighted
/// space; "ess sup" is vacuous on a grid).
inline double weighted_norm(const Field& f, double p, const Field& rho, const Grid& g) {
  if (!(p >= 1.0)) throw std::invalid_argument("weighted_norm: need p >= 1");
  if (p == kInfP) {
    double m = 0.0;
    for (double v : f) m = std::max(m, std::abs(v));
    return m;
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) acc += std::pow(std::abs(f[i]), p) * rho[i];
  return std::pow(acc * g.cellvol(), 1.0 / p);
}

/// Weighted inner product <f, g>_rho = sum f*g*rho*cellvol.
inline double weighted_inner(const Field& a, const Field& b, const Field& rho, const Grid& g) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i] * rho[i];
  return s * g.cellvol();
}

/// Weighted integral of a field (signed).
inline double weighted_integral(const Field& f, const Field& rho, const Grid& g) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * rho[i];
  return s * g.cellvol();
}

}  // namespace fpme
