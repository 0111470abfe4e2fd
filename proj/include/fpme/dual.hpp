#pragma once

/// \file dual.hpp
/// \brief The weighted linear operator A = rho^{-1}(-Delta)^s, its symmetrized
///        spectral data and Markov semigroup, and the backward dual problem
///        with piecewise-constant-in-time coefficients
///          rho psi_t = (-Delta)^s[(a_n + eps) psi],  psi(T) given,
/// used to probe uniqueness of the forward flow.
///
/// The semigroup e^{-tA} is computed through the similarity transform
/// S = rho^{-1/2} (-Delta)^s rho^{-1/2}: S is real symmetric, so a dense
/// eigendecomposition gives the exact flow of the spatially-discrete system.
/// Dense spectral data is limited to 1024 nodes; that covers every diagnostic
/// here (the forward solver never needs it).
///
/// solve_dual marches interval by interval using the change of variables
/// phi = (a_n + eps) zeta: phi obeys the constant-coefficient equation of the
/// reweighted operator rho_k^{-1}(-Delta)^s with rho_k = rho/(a_n + eps), so
/// each interval is again an exact matrix exponential. zeta (= psi) is
/// continuous across interval boundaries; phi jumps with the coefficient.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fpme/frac_ops.hpp"
#include "fpme/grid.hpp"
#include "fpme/measures.hpp"
#include "fpme/report.hpp"
#include "fpme/solver.hpp"
#include "fpme/weights.hpp"

namespace fpme {

/// Largest node count for which the dense symmetrized eigendecomposition is
/// materialized.
inline constexpr std::size_t kDenseSpectrumLimit = 1024;

struct WeightedOperator {
  Grid grid;
  WeightSpec weight;
  Field rho;
  FracKernelConfig op;
  bool materialized = false;
  std::vector<double> eigenvalues;   ///< ascending; of rho^{-1/2} L rho^{-1/2}
  Eigen::MatrixXd eigenvectors;      ///< columns match eigenvalues
};

inline WeightedOperator make_weighted_operator(const WeightSpec& w, const Grid& g, double s,
                                               FracMethod method = FracMethod::Spectral) {
  validate_weight_hypotheses(w, g.d, s);
  WeightedOperator out;
  out.grid = g;
  out.weight = w;
  out.rho = eval_weight(w, g);
  out.op = frac_config(g.d, s, s, method);
  return out;
}

/// A(v) = rho^{-1} (-Delta)^s v, one operator apply plus a diagonal scale.
inline Field apply_A(const WeightedOperator& op, const Field& v) {
  Field out = apply_frac_power(v, op.op, op.grid);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] /= op.rho[i];
  return out;
}

namespace detail {

/// Dense matrix of (-Delta)^s assembled column by column (dimension- and
/// method-agnostic; the cost is n operator applies).
inline Eigen::MatrixXd dense_operator_matrix(const FracKernelConfig& cfg, const Grid& g) {
  const std::size_t n = g.size();
  Eigen::MatrixXd L(n, n);
  Field e(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    const auto col = apply_frac_power(e, cfg, g);
    e[j] = 0.0;
    for (std::size_t i = 0; i < n; ++i) L(i, j) = col[i];
  }
  return L;
}

/// Eigendecomposition of rho^{-1/2} L rho^{-1/2} for a given weight field.
inline void symmetrized_spectrum(const Eigen::MatrixXd& L, const Field& rho,
                                 std::vector<double>& eigenvalues,
                                 Eigen::MatrixXd& eigenvectors) {
  const std::size_t n = rho.size();
  Eigen::MatrixXd S(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const double di = 1.0 / std::sqrt(rho[i]);
    for (std::size_t j = 0; j < n; ++j) S(i, j) = di * L(i, j) / std::sqrt(rho[j]);
  }
  // enforce exact symmetry before the solver (rounding from the FFT applies)
  S = 0.5 * (S + S.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("weighted operator: eigendecomposition failed");
  eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + n);
  eigenvectors = es.eigenvectors();
}

/// e^{-t rho^{-1} L} v0 = rho^{-1/2} V e^{-t diag} V^T rho^{1/2} v0.
inline Field spectral_exponential(const std::vector<double>& eigenvalues,
                                  const Eigen::MatrixXd& eigenvectors, const Field& rho,
                                  const Field& v0, double t) {
  const std::size_t n = v0.size();
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) y(i) = std::sqrt(rho[i]) * v0[i];
  Eigen::VectorXd c = eigenvectors.transpose() * y;
  for (std::size_t k = 0; k < n; ++k) c(k) *= std::exp(-t * eigenvalues[k]);
  y = eigenvectors * c;
  Field out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = y(i) / std::sqrt(rho[i]);
  return out;
}

}  // namespace detail

inline void materialize_spectrum(WeightedOperator& op) {
  if (op.materialized) return;
  if (op.grid.size() > kDenseSpectrumLimit)
    throw std::invalid_argument("weighted operator: dense spectral data limited to " +
                                std::to_string(kDenseSpectrumLimit) + " nodes");
  const auto L = detail::dense_operator_matrix(op.op, op.grid);
  detail::symmetrized_spectrum(L, op.rho, op.eigenvalues, op.eigenvectors);
  op.materialized = true;
}

/// e^{-tA} v0 through the symmetrized eigendecomposition.
inline Field semigroup_step(const WeightedOperator& op, const Field& v0, double t) {
  if (t < 0.0) throw std::invalid_argument("semigroup: time must be nonnegative");
  if (!op.materialized)
    throw std::logic_error("semigroup: spectral data not materialized (call materialize_spectrum)");
  if (v0.size() != op.grid.size()) throw std::invalid_argument("semigroup: field size mismatch");
  return detail::spectral_exponential(op.eigenvalues, op.eigenvectors, op.rho, v0, t);
}

/// Piecewise-constant-in-time coefficient of the dual problem. Interval k
/// (k = 0 latest) is (T-(k+1)T/n, T-kT/n]; a[k] is its coefficient field.
struct DualCoefficient {
  double T = 0.0;
  int n_intervals = 0;
  double eps = 0.0;  ///< uniform floor added to every coefficient field
  std::vector<Field> a;
};

/// Samples the difference quotient (u1^m - u2^m(+h)) / (u1 - u2(+h)) at the
/// left endpoint of each interval, mollifying the two input states in x at
/// scale 2*spacing first (so the quotient inherits regularity in x while the
/// mean-value bound 0 <= a <= m max(v1,v2)^{m-1} survives nodewise).
/// Denominators at or below 1e-13 take the coincidence branch a = 0.
inline DualCoefficient build_coefficient(const Trajectory& u1, const Trajectory& u2, double h,
                                         int n_intervals, double T, double eps) {
  if (u1.grid.d != u2.grid.d || u1.grid.n != u2.grid.n || u1.grid.L != u2.grid.L)
    throw std::invalid_argument("coefficient: trajectories live on different grids");
  if (u1.config.m != u2.config.m)
    throw std::invalid_argument("coefficient: trajectories have different exponents m");
  if (!(T > 0.0) || n_intervals < 1)
    throw std::invalid_argument("coefficient: need T > 0 and at least one interval");
  if (h < 0.0) throw std::invalid_argument("coefficient: time offset must be nonnegative");
  const Grid& g = u1.grid;
  const double m = u1.config.m;

  Mollifier moll;
  moll.eps = 2.0 * g.h;
  DualCoefficient coef;
  coef.T = T;
  coef.n_intervals = n_intervals;
  coef.eps = eps;
  coef.a.reserve(n_intervals);
  for (int k = 0; k < n_intervals; ++k) {
    const double t_left = T - double(k + 1) * T / double(n_intervals);
    const auto& r1 = u1.records[detail::record_index_at(u1, t_left, "coefficient")];
    const auto& r2 = u2.records[detail::record_index_at(u2, t_left + h, "coefficient")];
    MeasureSpec m1, m2;
    m1.density = r1.u;
    m2.density = r2.u;
    const auto v1 = mollify_measure(m1, moll, g);
    const auto v2 = mollify_measure(m2, moll, g);
    Field a(g.size(), 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double diff = v1[i] - v2[i];
      if (std::abs(diff) > 1e-13)
        a[i] = (std::pow(v1[i], m) - std::pow(v2[i], m)) / diff;
    }
    coef.a.push_back(std::move(a));
  }
  return coef;
}

struct DualRecord {
  double t = 0.0;
  Field psi;
};

/// Backward trajectory of the dual problem, recorded at sub_samples uniform
/// times per marched interval (plus the final datum at T), sorted by
/// increasing t.
struct DualTrajectory {
  double T = 0.0;
  double eps = 0.0;
  int sub_samples = 1;
  std::vector<DualRecord> records;
};

/// Marches psi backward from T to t_stop. Each interval evolves
/// phi = (a_k + eps) psi with the exact exponential of the reweighted
/// operator (rho/(a_k + eps))^{-1} (-Delta)^s. t_stop must lie on the
/// sub-sample lattice of spacing T/(n_intervals*sub_samples).
inline DualTrajectory solve_dual(const DualCoefficient& coef, const Field& psi,
                                 const WeightedOperator& base, double t_stop = 0.0,
                                 int sub_samples = 1) {
  const Grid& g = base.grid;
  if (!(coef.eps > 0.0))
    throw std::invalid_argument("dual solve: coefficient floor eps must be strictly positive");
  if (coef.n_intervals < 1 || coef.a.size() != std::size_t(coef.n_intervals) || !(coef.T > 0.0))
    throw std::invalid_argument("dual solve: malformed coefficient partition");
  if (psi.size() != g.size())
    throw std::invalid_argument("dual solve: final datum size mismatch");
  for (double v : psi)
    if (v < 0.0) throw std::invalid_argument("dual solve: final datum must be nonnegative");
  for (const auto& a : coef.a) {
    if (a.size() != g.size())
      throw std::invalid_argument("dual solve: coefficient field size mismatch");
    for (double v : a)
      if (v < 0.0)
        throw std::invalid_argument("dual solve: coefficient plus floor must be strictly positive");
  }
  if (sub_samples < 1) throw std::invalid_argument("dual solve: need at least one sub-sample");
  const double dq = coef.T / double(coef.n_intervals * sub_samples);
  if (std::abs(t_stop - std::round(t_stop / dq) * dq) > 1e-9 * std::max(1.0, coef.T) ||
      t_stop < 0.0 || t_stop >= coef.T)
    throw std::invalid_argument(
        "dual solve: stop time must lie on the sub-sample lattice inside [0, T)");

  if (g.size() > kDenseSpectrumLimit)
    throw std::invalid_argument("dual solve: dense spectral data limited to " +
                                std::to_string(kDenseSpectrumLimit) + " nodes");
  const auto L = detail::dense_operator_matrix(base.op, g);

  DualTrajectory out;
  out.T = coef.T;
  out.eps = coef.eps;
  out.sub_samples = sub_samples;
  out.records.push_back({coef.T, psi});

  Field zeta = psi;
  const double width = coef.T / double(coef.n_intervals);
  for (int k = 0; k < coef.n_intervals; ++k) {
    const double t_hi = coef.T - double(k) * width;
    const double t_lo = t_hi - width;
    if (t_hi <= t_stop + 1e-12 * coef.T) break;

    Field w(g.size()), rho_k(g.size()), phi_hi(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      w[i] = coef.a[k][i] + coef.eps;
      rho_k[i] = base.rho[i] / w[i];
      phi_hi[i] = w[i] * zeta[i];
    }
    std::vector<double> evals;
    Eigen::MatrixXd evecs;
    detail::symmetrized_spectrum(L, rho_k, evals, evecs);

    for (int j = 1; j <= sub_samples; ++j) {
      const double t = t_hi - double(j) * dq;
      if (t < t_stop - 1e-12 * coef.T) break;
      const auto phi = detail::spectral_exponential(evals, evecs, rho_k, phi_hi, t_hi - t);
      Field rec(g.size());
      for (std::size_t i = 0; i < g.size(); ++i) rec[i] = phi[i] / w[i];
      if (j == sub_samples) zeta = rec;  // hand the interval boundary to the next interval
      out.records.push_back({t, std::move(rec)});
    }
    if (t_lo <= t_stop + 1e-12 * coef.T) break;
  }
  std::reverse(out.records.begin(), out.records.end());
  return out;
}

namespace detail {

inline std::size_t dual_record_index_at(const DualTrajectory& traj, double t) {
  for (std::size_t k = 0; k < traj.records.size(); ++k) {
    if (std::abs(traj.records[k].t - t) <= 1e-12 * std::max(1.0, t)) return k;
  }
  throw std::invalid_argument("duality check: time " + std::to_string(t) +
                              " is not a recorded dual state");
}

}  // namespace detail

/// Checks the duality identity on [t, T],
///   int g(T) psi rho dx - int g(t) psi_dual(t) rho dx
///     = int_t^T int (a_n + eps - a) (-Delta)^s(g) psi_dual dx dtau,
/// where g(tau) is the potential difference of the two runs. Both runs must
/// start from the same grid state; then g(tau) = cum1(tau) - cum2(tau + h)
/// exactly (the accumulated-u^m ledgers telescope the potential law), with no
/// free-space potential truncation involved. The true coefficient a(tau) is
/// rebuilt from the raw (unmollified) records at every quadrature node.
/// Also reports the epsilon bound
///   |lhs| <= eps (T - t) ||psi||_{1,rho} sup_tau ||u2(+h) - u1||_inf,
/// the n -> infinity limit form, as results (ratio and excess); it gates
/// nothing because at finite n the coefficient-sampling defect can dominate
/// the eps term.
inline DiagnosticsReport duality_identity_check(const Trajectory& u1, const Trajectory& u2,
                                                double h, const DualCoefficient& coef,
                                                const DualTrajectory& dual, double t,
                                                double residual_tol = 1e-6) {
  const Grid& g = u1.grid;
  if (u2.grid.n != g.n || u2.grid.L != g.L || u2.grid.d != g.d)
    throw std::invalid_argument("duality check: trajectories live on different grids");
  if (u1.config.m != u2.config.m)
    throw std::invalid_argument("duality check: trajectories have different exponents m");
  if (!(t > 0.0) || !(t < coef.T))
    throw std::invalid_argument("duality check: need 0 < t < T");
  {
    double worst = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      worst = std::max(worst, std::abs(u1.records[0].u[i] - u2.records[0].u[i]));
      scale = std::max(scale, std::abs(u1.records[0].u[i]));
    }
    if (worst > 1e-12 * std::max(1.0, scale))
      throw std::invalid_argument(
          "duality check: runs must start from the same grid state (the potential difference "
          "is anchored to the accumulated-u^m ledgers)");
  }
  const double m = u1.config.m;
  const Field& rho = u1.rho;
  const auto& psi_final = dual.records.back();
  if (std::abs(psi_final.t - coef.T) > 1e-12 * std::max(1.0, coef.T))
    throw std::invalid_argument("duality check: dual trajectory does not reach T");

  // g(tau) = cum1(tau) - cum2(tau + h)
  const auto g_field = [&](double tau) {
    const auto& r1 = u1.records[detail::record_index_at(u1, tau, "duality check")];
    const auto& r2 = u2.records[detail::record_index_at(u2, tau + h, "duality check")];
    Field out(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) out[i] = r1.cum_um[i] - r2.cum_um[i];
    return out;
  };

  // lhs
  const auto gT = g_field(coef.T);
  const auto gt = g_field(t);
  const auto& psi_t = dual.records[detail::dual_record_index_at(dual, t)].psi;
  const double lhs = weighted_inner(gT, psi_final.psi, rho, g) - weighted_inner(gt, psi_t, rho, g);

  // rhs: per-segment trapezoid over dual records in [t, T]; each segment's
  // coefficient is the one of the interval the segment lies in (the records
  // include every interval boundary, so segments never straddle a jump)
  const double width = coef.T / double(coef.n_intervals);
  const auto opcfg = frac_config(g.d, u1.config.s, u1.config.s, u1.config.method);
  double sup_du = 0.0;
  const auto integrand = [&](double tau, const Field& psi_tau, const Field& a_n) {
    const auto& r1 = u1.records[detail::record_index_at(u1, tau, "duality check")];
    const auto& r2 = u2.records[detail::record_index_at(u2, tau + h, "duality check")];
    const auto lg = apply_frac_power(g_field(tau), opcfg, g);
    double acc = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double du = r1.u[i] - r2.u[i];
      sup_du = std::max(sup_du, std::abs(du));
      double a_true = 0.0;
      if (std::abs(du) > 1e-13) a_true = (std::pow(r1.u[i], m) - std::pow(r2.u[i], m)) / du;
      acc += (a_n[i] + coef.eps - a_true) * lg[i] * psi_tau[i];
    }
    return acc * g.cellvol();
  };

  double rhs = 0.0;
  std::size_t j0 = detail::dual_record_index_at(dual, t);
  for (std::size_t j = j0; j + 1 < dual.records.size(); ++j) {
    const double ta = dual.records[j].t, tb = dual.records[j + 1].t;
    const double mid = 0.5 * (ta + tb);
    int k = int(std::floor((coef.T - mid) / width));
    k = std::max(0, std::min(coef.n_intervals - 1, k));
    const double fa = integrand(ta, dual.records[j].psi, coef.a[k]);
    const double fb = integrand(tb, dual.records[j + 1].psi, coef.a[k]);
    rhs += 0.5 * (tb - ta) * (fa + fb);
  }

  const double residual = std::abs(lhs - rhs) / std::max({1.0, std::abs(lhs), std::abs(rhs)});
  const double psi_mass = weighted_norm(psi_final.psi, 1.0, rho, g);
  const double eps_bound = coef.eps * (coef.T - t) * psi_mass * sup_du;

  DiagnosticsReport rep;
  rep.check = "duality_identity";
  rep.parameters["t"] = t;
  rep.parameters["T"] = coef.T;
  rep.parameters["h"] = h;
  rep.parameters["eps"] = coef.eps;
  rep.parameters["n_intervals"] = coef.n_intervals;
  rep.add_result("lhs", lhs);
  rep.add_result("rhs", rhs);
  rep.add_result("eps_bound", eps_bound);
  rep.add_result("eps_bound_ratio", std::abs(lhs) / std::max(eps_bound, 1e-300));
  rep.add_result("eps_bound_excess", std::max(0.0, std::abs(lhs) - eps_bound));
  rep.add_violation("identity_residual", residual, residual_tol);
  return rep;
}

}  // namespace fpme
