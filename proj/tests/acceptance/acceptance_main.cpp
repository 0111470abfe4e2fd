/// \file acceptance_main.cpp
/// \brief Acceptance gate: twelve end-to-end criteria, one PASS/FAIL line each.
///
/// Every tolerance is pinned here, next to the criterion it gates. The binary
/// exits nonzero if any criterion fails, so CI can gate on it directly. The
/// fixtures are sized so the whole gate runs in a few minutes on one core.

#include <cmath>
#include <cstdio>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "fpme/config.hpp"
#include "fpme/diagnostics.hpp"
#include "fpme/dual.hpp"
#include "fpme/sampling.hpp"

namespace {

using fpme::Field;
using fpme::Grid;
using fpme::Trajectory;

struct Gate {
  int failed = 0;
  int total = 0;
  void line(const std::string& id, bool ok, const std::string& what,
            const std::string& detail) {
    ++total;
    if (!ok) ++failed;
    std::printf("%-4s %s  %s%s%s\n", id.c_str(), ok ? "PASS" : "FAIL", what.c_str(),
                detail.empty() ? "" : "  -- ", detail.c_str());
    std::fflush(stdout);
  }
};

std::string fmt(double v) {
  std::ostringstream ss;
  ss << std::setprecision(4) << v;
  return ss.str();
}

std::vector<double> lin_times(double a, double b, int count) {
  std::vector<double> ts(count);
  for (int i = 0; i < count; ++i) ts[i] = a + (b - a) * double(i) / double(count - 1);
  return ts;
}

std::vector<double> log_times(double a, double b, int count) {
  std::vector<double> ts(count);
  for (int i = 0; i < count; ++i) ts[i] = a * std::pow(b / a, double(i) / double(count - 1));
  return ts;
}

std::vector<double> uniform_records(double dq, int count) {
  std::vector<double> ts(count);
  for (int i = 0; i < count; ++i) ts[i] = dq * double(i + 1);
  return ts;
}

Trajectory run_delta(double mass, double x0, double eps, std::size_t n, double L,
                     const fpme::WeightSpec& w, double s, double m, std::vector<double> times,
                     double dt_max, double dt_init = 1e-5) {
  fpme::MeasureSpec mu;
  fpme::Atom a;
  a.x = x0;
  a.mass = mass;
  mu.atoms.push_back(a);
  const auto g = fpme::make_grid(1, n, L);
  fpme::SolverConfig cfg;
  cfg.m = m;
  cfg.s = s;
  cfg.record_times = std::move(times);
  cfg.dt_init = dt_init;
  cfg.dt_max = dt_max;
  return fpme::evolve(mu, eps, cfg, w, g);
}

double run_drift(const Trajectory& tr) {
  const double m0 = tr.records.front().mass;
  const double mT = tr.records.back().mass;
  return std::max(tr.max_step_rel_mass_drift, std::abs(mT - m0) / std::max(m0, 1e-300));
}

Field bump(const Grid& g, double width, double height) {
  Field f(g.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    f[i] = height * fpme::bump_profile(g.axis_coord(i) / width);
  return f;
}

double sup_diff(const Field& a, const Field& b) {
  double w = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) w = std::max(w, std::abs(a[i] - b[i]));
  return w;
}

}  // namespace

int main() {
  Gate gate;
  std::vector<Trajectory> flat_ladder, weighted_ladder;

  // -------------------------------------------------------------------------
  // C1: point-mass runs with a flat weight collapse onto the predicted
  //     decay exponents in both time and mass.
  // -------------------------------------------------------------------------
  try {
    constexpr double kAlphaBand = 0.10, kBetaBand = 0.15, kRmsBand = 0.02;
    const fpme::WeightSpec w;  // flat
    for (double mass : {0.5, 1.0, 2.0, 4.0})
      flat_ladder.push_back(run_delta(mass, 0.0, 0.02, 4096, 20.0, w, 0.4, 2.0,
                                      log_times(1e-3, 1e-1, 20), 5e-4));
    const auto fit = fpme::smoothing_fit(flat_ladder, {2e-3, 1e-1});
    const double ea = std::abs(fit.alpha_hat - fit.alpha_theory) / fit.alpha_theory;
    const double eb = std::abs(fit.beta_hat - fit.beta_theory) / fit.beta_theory;
    gate.line("C1", ea <= kAlphaBand && eb <= kBetaBand && fit.residual_rms < kRmsBand,
              "flat-weight smoothing exponents match the scaling prediction",
              "alpha " + fmt(fit.alpha_hat) + " vs " + fmt(fit.alpha_theory) + " (err " +
                  fmt(100.0 * ea) + "%), beta " + fmt(fit.beta_hat) + " vs " +
                  fmt(fit.beta_theory) + " (err " + fmt(100.0 * eb) + "%), rms " +
                  fmt(fit.residual_rms));
  } catch (const std::exception& e) {
    gate.line("C1", false, "flat-weight smoothing exponents", e.what());
  }

  // -------------------------------------------------------------------------
  // C2: the weighted problem shifts both exponents exactly as the weighted
  //     scaling analysis predicts.
  // -------------------------------------------------------------------------
  try {
    constexpr double kAlphaBand = 0.12, kBetaBand = 0.15, kRmsBand = 0.02;
    fpme::WeightSpec w;
    w.gamma = 0.1;
    w.gamma0 = 0.0;
    w.profile = fpme::WeightProfile::TwoRegime;
    for (double mass : {0.5, 1.0, 2.0, 4.0})
      weighted_ladder.push_back(run_delta(mass, 0.0, 0.02, 4096, 20.0, w, 0.45, 2.0,
                                          log_times(1e-3, 1e-1, 20), 5e-4));
    const auto fit = fpme::smoothing_fit(weighted_ladder, {2e-3, 1e-1});
    const double ea = std::abs(fit.alpha_hat - fit.alpha_theory) / fit.alpha_theory;
    const double eb = std::abs(fit.beta_hat - fit.beta_theory) / fit.beta_theory;
    gate.line("C2", ea <= kAlphaBand && eb <= kBetaBand && fit.residual_rms < kRmsBand,
              "weighted smoothing exponents match the weighted prediction",
              "alpha " + fmt(fit.alpha_hat) + " vs " + fmt(fit.alpha_theory) + " (err " +
                  fmt(100.0 * ea) + "%), beta " + fmt(fit.beta_hat) + " vs " +
                  fmt(fit.beta_theory) + " (err " + fmt(100.0 * eb) + "%), rms " +
                  fmt(fit.residual_rms));
  } catch (const std::exception& e) {
    gate.line("C2", false, "weighted smoothing exponents", e.what());
  }

  // -------------------------------------------------------------------------
  // C3: every ladder run conserves the weighted mass to rounding accuracy.
  // -------------------------------------------------------------------------
  try {
    constexpr double kDriftBand = 1e-8;
    double worst = 0.0;
    int count = 0;
    for (const auto* ladder : {&flat_ladder, &weighted_ladder})
      for (const auto& tr : *ladder) {
        worst = std::max(worst, run_drift(tr));
        ++count;
      }
    gate.line("C3", count == 8 && worst <= kDriftBand,
              "weighted mass is conserved on every run",
              "worst relative drift " + fmt(worst) + " over " + std::to_string(count) +
                  " runs (band " + fmt(kDriftBand) + ")");
  } catch (const std::exception& e) {
    gate.line("C3", false, "weighted mass conservation", e.what());
  }

  // -------------------------------------------------------------------------
  // C4: the energy identity residual shrinks first-order in dt, and the
  //     energy is a Lyapunov functional at every resolution.
  // -------------------------------------------------------------------------
  try {
    constexpr double kRatioLo = 1.5, kRatioHi = 3.0;
    const fpme::WeightSpec w;
    std::vector<double> residuals;
    bool lyapunov_ok = true;
    for (double dt : {4e-4, 2e-4, 1e-4}) {
      // records dense enough that their sampling error sits well below the
      // dt-dependent part at every level
      const auto tr =
          run_delta(1.0, 0.0, 0.2, 512, 10.0, w, 0.4, 2.0, lin_times(0.00125, 0.05, 40), dt);
      const auto rep = fpme::energy_report(tr, 0.01, 0.05);
      residuals.push_back(rep.results.at("energy_identity_residual").get<double>());
      lyapunov_ok = lyapunov_ok && rep.pass;
    }
    const double r01 = residuals[0] / residuals[1];
    const double r12 = residuals[1] / residuals[2];
    const bool first_order =
        r01 >= kRatioLo && r01 <= kRatioHi && r12 >= kRatioLo && r12 <= kRatioHi;
    gate.line("C4", lyapunov_ok && first_order,
              "energy identity converges first-order in dt; energy decays",
              "residuals {" + fmt(residuals[0]) + ", " + fmt(residuals[1]) + ", " +
                  fmt(residuals[2]) + "}, halving ratios " + fmt(r01) + ", " + fmt(r12) +
                  " (band [1.5, 3])");
  } catch (const std::exception& e) {
    gate.line("C4", false, "energy identity dt-convergence", e.what());
  }

  // -------------------------------------------------------------------------
  // C5: the time derivative obeys the measure-norm bound 2 M / ((m-1) t).
  // -------------------------------------------------------------------------
  try {
    constexpr double kRatioBand = 1.2;
    const auto& tr = flat_ladder.at(1);  // mass-1 run
    double worst = 0.0;
    for (double t : {0.01, 0.02, 0.05, 0.09}) {
      const auto rep = fpme::ut_radon_bound_check(tr, t);
      worst = std::max(worst, rep.results.at("ratio").get<double>());
    }
    gate.line("C5", worst <= kRatioBand, "du/dt stays within the measure-norm decay bound",
              "worst measured/bound ratio " + fmt(worst) + " on [0.01, 0.09] (band " +
                  fmt(kRatioBand) + ")");
  } catch (const std::exception& e) {
    gate.line("C5", false, "du/dt measure-norm bound", e.what());
  }

  // -------------------------------------------------------------------------
  // C6: the flow is an ordered contraction: positive parts of differences
  //     shrink and every tracked weighted norm is nonincreasing.
  // -------------------------------------------------------------------------
  try {
    constexpr int kPairs = 20;
    const auto g = fpme::make_grid(1, 256, 10.0);
    fpme::WeightSpec w;
    w.gamma = 0.1;
    w.gamma0 = 0.05;
    fpme::SolverConfig cfg;
    cfg.m = 2.0;
    cfg.s = 0.4;
    cfg.record_times = lin_times(0.005, 0.05, 5);
    cfg.dt_max = 5e-4;
    double worst_gap = 0.0, worst_inc = 0.0;
    bool all_pass = true;
    for (int k = 0; k < kPairs; ++k) {
      const auto u0 = fpme::smooth_positive_field(g, unsigned(3000 + 2 * k));
      const auto v0 = fpme::smooth_positive_field(g, unsigned(3001 + 2 * k));
      const auto rep = fpme::contraction_check(u0, v0, cfg, w, g);
      all_pass = all_pass && rep.pass;
      worst_gap = std::max(worst_gap, rep.results.at("positive_part_gap_max").get<double>());
      worst_inc = std::max(worst_inc, rep.results.at("lp_increment_max").get<double>());
    }
    gate.line("C6", all_pass, "weighted L1 ordered contraction over random pairs",
              "worst positive-part growth " + fmt(worst_gap) + ", worst norm increment " +
                  fmt(worst_inc) + " over " + std::to_string(kPairs) + " pairs (band 1e-8)");
  } catch (const std::exception& e) {
    gate.line("C6", false, "ordered contraction", e.what());
  }

  // -------------------------------------------------------------------------
  // C7: potentials decrease monotonically under the squeeze bounds, and the
  //     initial measure is recovered from the evolved states.
  // -------------------------------------------------------------------------
  try {
    constexpr double kTraceMassBand = 1e-3;
    const auto pot = fpme::potential_report(fpme::potential_trajectory(flat_ladder.at(1)));
    const fpme::WeightSpec w;
    const auto tr_run = run_delta(1.5, 0.8, 0.2, 512, 10.0, w, 0.4, 2.0,
                                  {0.005, 0.01, 0.02, 0.04, 0.08}, 5e-4);
    const auto trace = fpme::initial_trace(tr_run);
    const double mass_err = std::abs(trace.mass - 1.5);
    const bool ok = pot.pass && trace.certificate && mass_err <= kTraceMassBand;
    gate.line("C7", ok, "potential monotonicity, squeeze, and initial-trace recovery",
              std::string("potential report ") + (pot.pass ? "pass" : "fail") +
                  ", trace mass err " + fmt(mass_err) + " (band " + fmt(kTraceMassBand) +
                  "), certificate " + (trace.certificate ? "true" : "false"));
  } catch (const std::exception& e) {
    gate.line("C7", false, "potential monotonicity and trace recovery", e.what());
  }

  // -------------------------------------------------------------------------
  // C8: the weighted linear operator is symmetric, nonnegative, and generates
  //     a Markov semigroup.
  // -------------------------------------------------------------------------
  try {
    constexpr double kSymBand = 1e-12, kEigBand = 1e-10, kSgBand = 1e-10;
    const auto g = fpme::make_grid(1, 256, 10.0);
    fpme::WeightSpec w;
    w.gamma = 0.25;
    w.gamma0 = 0.1;
    auto op = fpme::make_weighted_operator(w, g, 0.35);
    double sym = 0.0;
    for (int k = 0; k < 50; ++k) {
      const auto u = fpme::smooth_positive_field(g, unsigned(100 + 2 * k));
      const auto v = fpme::smooth_positive_field(g, unsigned(101 + 2 * k));
      const double a = fpme::weighted_inner(fpme::apply_A(op, u), v, op.rho, g);
      const double b = fpme::weighted_inner(u, fpme::apply_A(op, v), op.rho, g);
      sym = std::max(sym, std::abs(a - b) / std::max(1.0, std::abs(a)));
    }
    fpme::materialize_spectrum(op);
    const double min_eig = op.eigenvalues.front();

    const auto f = fpme::smooth_positive_field(g, 500);
    const double idz = sup_diff(fpme::semigroup_step(op, f, 0.0), f);
    const double comp = sup_diff(
        fpme::semigroup_step(op, fpme::semigroup_step(op, f, 0.2), 0.3),
        fpme::semigroup_step(op, f, 0.5));
    const Field ones(g.size(), 1.0);
    const double fix = sup_diff(fpme::semigroup_step(op, ones, 0.4), ones);
    const auto evolved = fpme::semigroup_step(op, f, 0.4);
    const double mass_drift = std::abs(fpme::weighted_integral(evolved, op.rho, g) -
                                       fpme::weighted_integral(f, op.rho, g)) /
                              fpme::weighted_integral(f, op.rho, g);
    double min_val = 0.0;
    for (double x : evolved) min_val = std::min(min_val, x);
    const bool sg_ok = idz <= kSgBand && comp <= kSgBand && fix <= kSgBand &&
                       mass_drift <= kSgBand && -min_val <= kSgBand;
    gate.line("C8", sym <= kSymBand && min_eig >= -kEigBand && sg_ok,
              "weighted operator: symmetric, nonnegative, Markov semigroup",
              "symmetry defect " + fmt(sym) + ", min eigenvalue " + fmt(min_eig) +
                  ", worst semigroup defect " +
                  fmt(std::max({idz, comp, fix, mass_drift, -min_val})));
  } catch (const std::exception& e) {
    gate.line("C8", false, "weighted operator and semigroup", e.what());
  }

  // -------------------------------------------------------------------------
  // C9: the backward dual solver matches the semigroup oracle, conserves the
  //     weighted mass, and satisfies the forward/backward duality identity.
  // -------------------------------------------------------------------------
  try {
    constexpr double kOracleBand = 1e-8, kMassBand = 1e-9, kResidualBand = 1e-6;

    // constant-coefficient oracle: zero coefficient = semigroup at rate eps
    const auto g0 = fpme::make_grid(1, 128, 6.0);
    fpme::WeightSpec w0;
    w0.gamma = 0.25;
    w0.gamma0 = 0.1;
    auto base0 = fpme::make_weighted_operator(w0, g0, 0.35);
    fpme::materialize_spectrum(base0);
    fpme::DualCoefficient coef0;
    coef0.T = 0.04;
    coef0.n_intervals = 4;
    coef0.eps = 0.5;
    coef0.a.assign(4, Field(g0.size(), 0.0));
    const auto psi0 = bump(g0, 2.0, 1.0);
    const auto dual0 = fpme::solve_dual(coef0, psi0, base0, 0.0, 2);
    double oracle = 0.0;
    for (const auto& rec : dual0.records)
      oracle = std::max(
          oracle, sup_diff(rec.psi, fpme::semigroup_step(base0, psi0, 0.5 * (0.04 - rec.t))));

    // genuine coefficient from a point-mass run: mass + duality identity
    const auto g = fpme::make_grid(1, 256, 10.0);
    const fpme::WeightSpec w;
    fpme::SolverConfig cfg;
    cfg.m = 2.0;
    cfg.s = 0.4;
    const double T = 0.12;
    const int nint = 32, q = 8;
    const double dq = T / double(nint * q);
    cfg.record_times = uniform_records(dq, nint * q + 4);
    cfg.dt_init = 2e-5;
    cfg.dt_max = 2.5e-4;
    fpme::MeasureSpec mu;
    mu.atoms.push_back({0.0, 0.0, 1.0});
    const auto traj = fpme::evolve(mu, 0.16, cfg, w, g);
    const auto coef = fpme::build_coefficient(traj, traj, 4.0 * dq, nint, T, 1e-3);
    auto base = fpme::make_weighted_operator(w, g, cfg.s);
    fpme::materialize_spectrum(base);
    const auto psi = bump(g, 3.0, 1.0);
    const auto dual = fpme::solve_dual(coef, psi, base, 0.06, q);
    const double mT = fpme::weighted_integral(dual.records.back().psi, base.rho, g);
    double mass_drift = 0.0;
    for (const auto& rec : dual.records)
      mass_drift = std::max(mass_drift,
                            std::abs(fpme::weighted_integral(rec.psi, base.rho, g) - mT) /
                                std::abs(mT));
    const auto rep = fpme::duality_identity_check(traj, traj, 4.0 * dq, coef, dual, 0.06);
    const double residual = rep.results.at("identity_residual").get<double>();
    gate.line("C9",
              oracle <= kOracleBand && mass_drift <= kMassBand && residual <= kResidualBand,
              "dual solver: semigroup oracle, mass conservation, duality identity",
              "oracle gap " + fmt(oracle) + ", dual mass drift " + fmt(mass_drift) +
                  ", identity residual " + fmt(residual));
  } catch (const std::exception& e) {
    gate.line("C9", false, "backward dual solver", e.what());
  }

  // -------------------------------------------------------------------------
  // C10: approximating the same measure at finer mollification scales brings
  //      paired runs together, and the uniqueness pairing collapses to <= 0.
  // -------------------------------------------------------------------------
  try {
    constexpr double kFinalDistBand = 1e-2, kAitkenBand = 1e-5, kSignedBand = 1e-12;
    const fpme::WeightSpec w;
    std::vector<Trajectory> runs;
    for (double eps : {0.1, 0.05, 0.025, 0.0125})
      runs.push_back(run_delta(1.0, 0.0, eps, 4096, 10.0, w, 0.4, 2.0,
                               lin_times(0.0025, 0.1, 40), 5e-4));
    const auto bank = fpme::uniqueness_psi_bank(runs[0].grid);
    fpme::UniquenessOptions opt;
    opt.T = 0.04;
    opt.t_early = 0.01;
    std::vector<double> signed_maxes, dists;
    bool reps_pass = true;
    for (std::size_t p = 0; p + 1 < runs.size(); ++p) {
      const auto rep = fpme::uniqueness_gap(runs[p], runs[p + 1], 0.0, bank, opt);
      reps_pass = reps_pass && rep.pass;
      signed_maxes.push_back(rep.results.at("g_pairing_max_signed").get<double>());
      dists.push_back(fpme::sup_weighted_l1_distance(runs[p], runs[p + 1], 0.05, 0.1));
    }
    const double aitken =
        fpme::aitken_extrapolate(signed_maxes[0], signed_maxes[1], signed_maxes[2]);
    const bool dist_ok = dists[1] < dists[0] && dists[2] < dists[1] &&
                         dists[2] <= kFinalDistBand;
    const bool signed_ok = signed_maxes[0] <= kSignedBand && signed_maxes[1] <= kSignedBand &&
                           signed_maxes[2] <= kSignedBand && aitken <= kAitkenBand;
    gate.line("C10", reps_pass && dist_ok && signed_ok,
              "mollification refinement: runs converge, uniqueness pairing <= 0",
              "sup distances {" + fmt(dists[0]) + ", " + fmt(dists[1]) + ", " + fmt(dists[2]) +
                  "}, extrapolated pairing " + fmt(aitken));
  } catch (const std::exception& e) {
    gate.line("C10", false, "uniqueness pairing under refinement", e.what());
  }

  // -------------------------------------------------------------------------
  // C11: functional inequalities hold on a randomized field bank, with the
  //      q = 2 case an exact identity and the interpolation ratio stable.
  // -------------------------------------------------------------------------
  try {
    constexpr double kGapBand = 1e-9, kIdentityBand = 1e-10, kHomBand = 1e-10;
    constexpr int kCount = 100;
    const auto g = fpme::make_grid(1, 256, 10.0);
    fpme::WeightSpec w;
    w.gamma = 0.1;
    w.gamma0 = 0.05;
    double min_gap = fpme::kInfP, q2_worst = 0.0, rmin = fpme::kInfP, rmax = 0.0, hom = 0.0;
    for (int k = 0; k < kCount; ++k) {
      const auto v = fpme::smooth_positive_field(g, unsigned(7000 + k));
      for (double q : {1.5, 2.0, 3.0}) {
        const auto rep = fpme::stroock_varopoulos_check(v, q, 0.4, g);
        const double gap = rep.results.at("gap").get<double>();
        min_gap = std::min(min_gap, gap);
        if (q == 2.0) q2_worst = std::max(q2_worst, std::abs(gap));
      }
      const auto ck = fpme::ckn_check(v, 1.0, 2.0, w, g, 0.4);
      const double r = ck.results.at("ratio").get<double>();
      rmin = std::min(rmin, r);
      rmax = std::max(rmax, r);
      if (k < 5) {
        Field scaled = v;
        for (auto& x : scaled) x *= 3.7;
        const double rs = fpme::ckn_check(scaled, 1.0, 2.0, w, g, 0.4)
                              .results.at("ratio")
                              .get<double>();
        hom = std::max(hom, std::abs(rs - r) / r);
      }
    }
    const bool ok = min_gap >= -kGapBand && q2_worst <= kIdentityBand && hom <= kHomBand &&
                    rmin >= 0.3 && rmax <= 1.0;
    gate.line("C11", ok, "randomized functional-inequality sweep",
              "min entropy gap " + fmt(min_gap) + ", q=2 identity defect " + fmt(q2_worst) +
                  ", interpolation ratio in [" + fmt(rmin) + ", " + fmt(rmax) +
                  "], homogeneity defect " + fmt(hom));
  } catch (const std::exception& e) {
    gate.line("C11", false, "functional inequalities", e.what());
  }

  // -------------------------------------------------------------------------
  // C12: rescaled cutoffs obey the R^{-2s} scaling identities and their
  //      images decay with the kernel tail exponent -(d + 2s).
  // -------------------------------------------------------------------------
  try {
    constexpr double kIdentityBand = 1e-3, kSlopeBand = 0.2;
    const auto g1 = fpme::make_grid(1, 512, 8.0);
    const auto fam1 = fpme::make_cutoff_family(g1, 2.0, 0.25, fpme::FracMethod::Quadrature);
    const auto rep1 = fpme::cutoff_scaling_check(fam1, g1);
    const double frac_res = rep1.results.at("frac_identity_residual").get<double>();
    const double ls_res = rep1.results.at("ls_identity_residual").get<double>();

    const auto g2 = fpme::make_grid(1, 4096, 64.0);
    const auto fam2 = fpme::make_cutoff_family(g2, 1.0, 0.25, fpme::FracMethod::Quadrature,
                                               /*periodized=*/false);
    const auto rep2 = fpme::cutoff_scaling_check(fam2, g2);
    const double target = -(1.0 + 0.5);
    const double dev_frac =
        std::abs(rep2.results.at("frac_tail_slope").get<double>() - target);
    const double dev_ls = std::abs(rep2.results.at("ls_tail_slope").get<double>() - target);
    const bool ok = frac_res <= kIdentityBand && ls_res <= kIdentityBand &&
                    dev_frac <= kSlopeBand && dev_ls <= kSlopeBand;
    gate.line("C12", ok, "cutoff rescaling identities and kernel-tail decay",
              "identity residuals " + fmt(frac_res) + "/" + fmt(ls_res) +
                  ", tail slope deviations " + fmt(dev_frac) + "/" + fmt(dev_ls));
  } catch (const std::exception& e) {
    gate.line("C12", false, "cutoff scaling and tails", e.what());
  }

  std::printf("acceptance gate: %d/%d criteria passed\n", gate.total - gate.failed,
              gate.total);
  return gate.failed == 0 ? 0 : 1;
}
