/// \file fpme_cli.cpp
/// \brief Experiment driver: config ingestion, orchestration and persistence.
///
/// Subcommands wrap the library pipelines one-to-one:
///   simulate            data -> solve -> checks -> run directory
///   fit-exponents       mass ladder -> pooled decay-exponent fit
///   check-inequalities  randomized functional-inequality sweeps
///   dual-diagnostics    weighted operator, semigroup and duality checks
///   trace               measure recovery from a saved run directory
///   report              aggregate run summaries into one CSV
///
/// Exit codes: 0 success, 2 validation/config/IO error (message names the
/// violated clause), 3 solver abort, 64 usage error. All outputs are pure
/// functions of (config, seed): no timestamps, no machine names.

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "fpme/config.hpp"
#include "fpme/diagnostics.hpp"
#include "fpme/dual.hpp"
#include "fpme/io.hpp"
#include "fpme/sampling.hpp"

namespace fs = std::filesystem;
using fpme::ordered_json;

namespace {

int thread_budget() {
  if (const char* env = std::getenv("FPME_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : int(hw);
}

/// Runs fn(0..count-1) on up to `workers` threads. Each index must write only
/// its own slot so results are identical to the serial order.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
  const int use = std::min<std::size_t>(std::max(workers, 1), count);
  if (use <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(use);
  for (int w = 0; w < use; ++w)
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < count; i = next++) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::vector<double> parse_double_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::string item;
  std::istringstream ss(text);
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw std::invalid_argument(std::string(what) + ": cannot parse '" + item + "'");
    }
  }
  if (out.empty()) throw std::invalid_argument(std::string(what) + ": empty list");
  return out;
}

fpme::ExperimentConfig load_config(const std::string& path) {
  auto cfg = fpme::parse_experiment_config(fpme::read_json_file(path));
  fpme::validate_experiment(cfg);
  return cfg;
}

void write_report(const fs::path& out, const fpme::DiagnosticsReport& rep) {
  fs::create_directories(out / "reports");
  fpme::write_json_file((out / "reports" / (rep.check + ".json")).string(), rep.to_json());
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

const std::vector<std::string> kDefaultChecks = {"mass_conservation", "energy_identity",
                                                 "potential_monotonicity", "initial_trace"};
const std::vector<std::string> kKnownChecks = {
    "mass_conservation", "energy_identity",      "ut_radon_bound", "potential_monotonicity",
    "initial_trace",     "stroock_varopoulos",   "ckn",            "cutoff_scaling",
    "smoothing_fit",     "duality_identity",     "semigroup_properties"};

fpme::DiagnosticsReport mass_conservation_report(const fpme::Trajectory& traj, double tol) {
  fpme::DiagnosticsReport rep;
  rep.check = "mass_conservation";
  const double m0 = traj.records.front().mass;
  const double mT = traj.records.back().mass;
  rep.add_result("initial_mass", m0);
  rep.add_result("final_mass", mT);
  const double drift =
      std::max(traj.max_step_rel_mass_drift, std::abs(mT - m0) / std::max(m0, 1e-300));
  rep.add_violation("rel_mass_drift", drift, tol);
  return rep;
}

fpme::DiagnosticsReport initial_trace_report(const fpme::Trajectory& traj, double mass_tol) {
  const auto tr = fpme::initial_trace(traj);
  fpme::DiagnosticsReport rep;
  rep.check = "initial_trace";
  rep.add_result("mass", tr.mass);
  rep.add_result("t_trace", tr.t_trace);
  rep.add_result("gap_times", ordered_json(tr.gap_times));
  rep.add_result("gaps", ordered_json(tr.gaps));
  rep.add_violation("mass_error", std::abs(tr.mass - traj.records.front().mass), mass_tol);
  rep.add_violation("certificate_failure", tr.certificate ? 0.0 : 1.0, 0.5);
  return rep;
}

struct SimulateOutput {
  std::vector<fpme::SummaryRow> rows;
  bool potential_available = false;
  fpme::PotentialTrajectory potential;
};

SimulateOutput run_checks(const fpme::ExperimentConfig& cfg, const fpme::Trajectory& traj,
                          const fs::path& out) {
  SimulateOutput result;
  const fpme::Grid& g = traj.grid;

  std::vector<fpme::CheckSpec> checks;
  if (cfg.checks.empty()) {
    for (const auto& name : kDefaultChecks) checks.push_back({name, ordered_json::object()});
  } else {
    checks = cfg.checks;
  }

  std::vector<double> positive_times;
  for (const auto& rec : traj.records)
    if (rec.t > 0.0) positive_times.push_back(rec.t);

  for (const auto& spec : checks) {
    const auto opt = [&](const char* key, double fallback) {
      return spec.options.contains(key) ? spec.options.at(key).get<double>() : fallback;
    };
    const auto skip = [&](const std::string& reason) {
      result.rows.push_back({spec.name, "skip", 0.0, 0.0, reason});
    };
    if (spec.name == "mass_conservation") {
      const auto rep = mass_conservation_report(traj, opt("tolerance", 1e-8));
      write_report(out, rep);
      result.rows.push_back(fpme::summary_row(rep));
    } else if (spec.name == "energy_identity") {
      if (positive_times.size() < 2) {
        skip("needs at least 2 positive-time records");
        continue;
      }
      const double t1 = opt("t1", positive_times.front());
      const double t2 = opt("t2", positive_times.back());
      const auto rep = fpme::energy_report(traj, t1, t2);
      write_report(out, rep);
      result.rows.push_back(fpme::summary_row(rep));
    } else if (spec.name == "ut_radon_bound") {
      if (positive_times.size() < 2) {
        skip("needs at least 2 positive-time records");
        continue;
      }
      const double t = opt("t", positive_times[(positive_times.size() - 1) / 2]);
      const auto rep = fpme::ut_radon_bound_check(traj, t);
      write_report(out, rep);
      result.rows.push_back(fpme::summary_row(rep));
    } else if (spec.name == "potential_monotonicity") {
      result.potential = fpme::potential_trajectory(traj);
      result.potential_available = true;
      const auto rep = fpme::potential_report(result.potential);
      write_report(out, rep);
      result.rows.push_back(fpme::summary_row(rep));
    } else if (spec.name == "initial_trace") {
      if (positive_times.size() < 3) {
        skip("needs at least 3 positive-time records");
        continue;
      }
      const auto rep = initial_trace_report(traj, opt("mass_tolerance", 1e-3));
      write_report(out, rep);
      result.rows.push_back(fpme::summary_row(rep));
    } else if (spec.name == "stroock_varopoulos") {
      const int count = int(opt("count", 25));
      std::vector<double> qs = {1.5, 2.0, 3.0};
      if (spec.options.contains("q")) qs = spec.options.at("q").get<std::vector<double>>();
      fpme::DiagnosticsReport rep;
      rep.check = "stroock_varopoulos";
      rep.parameters["count"] = count;
      rep.parameters["q"] = qs;
      rep.parameters["seed"] = cfg.seed;
      double min_gap = fpme::kInfP;
      for (int k = 0; k < count; ++k) {
        const auto v = fpme::smooth_positive_field(g, unsigned(cfg.seed + 1000 + k));
        for (double q : qs)
          min_gap = std::min(
              min_gap, fpme::stroock_varopoulos_check(v, q, cfg.s, g).results["gap"].get<double>());
      }
      rep.add_result("min_gap", min_gap);
      rep.add_violation("negative_gap", std::max(0.0, -min_gap), 1e-9);
      write_report(out, rep);
      result.rows.push_back(fpme::summary_row(rep));
    } else if (spec.name == "ckn") {
      const int count = int(opt("count", 25));
      const double alpha = opt("alpha", 1.0);
      const double p = opt("p", 2.0);
      fpme::DiagnosticsReport rep;
      rep.check = "ckn";
      rep.parameters["count"] = count;
      rep.parameters["alpha"] = alpha;
      rep.parameters["p"] = p;
      rep.parameters["seed"] = cfg.seed;
      double rmin = fpme::kInfP, rmax = 0.0;
      for (int k = 0; k < count; ++k) {
        const auto v = fpme::smooth_positive_field(g, unsigned(cfg.seed + 2000 + k));
        const double r =
            fpme::ckn_check(v, alpha, p, cfg.weight, g, cfg.s).results["ratio"].get<double>();
        rmin = std::min(rmin, r);
        rmax = std::max(rmax, r);
      }
      rep.add_result("ratio_min", rmin);
      rep.add_result("ratio_max", rmax);
      rep.add_violation("nonfinite_ratio", std::isfinite(rmax) ? 0.0 : fpme::kInfP, 0.0);
      write_report(out, rep);
      result.rows.push_back(fpme::summary_row(rep));
    } else if (spec.name == "cutoff_scaling") {
      const double R = opt("R", g.L / 4.0);
      const auto fam = fpme::make_cutoff_family(g, R, cfg.s, cfg.solver.method);
      const auto rep = fpme::cutoff_scaling_check(fam, g);
      write_report(out, rep);
      result.rows.push_back(fpme::summary_row(rep));
    } else if (spec.name == "smoothing_fit") {
      skip("needs several masses; run fit-exponents");
    } else if (spec.name == "duality_identity" || spec.name == "semigroup_properties") {
      skip("runs under dual-diagnostics");
    }
  }
  return result;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir, long seed_override,
                 bool verbose) {
  auto cfg = load_config(config_path);
  if (seed_override >= 0) cfg.seed = static_cast<unsigned long>(seed_override);
  for (const auto& spec : cfg.checks)
    if (std::find(kKnownChecks.begin(), kKnownChecks.end(), spec.name) == kKnownChecks.end())
      throw std::invalid_argument("config checks block: unknown check '" + spec.name + "'");

  const auto g = fpme::make_grid(cfg.d, cfg.n, cfg.L);
  const auto traj = fpme::evolve(cfg.measure, cfg.mollify_eps, cfg.solver, cfg.weight, g);

  const fs::path out(out_dir);
  fs::create_directories(out / "plots");
  fpme::save_run(out.string(), traj, &cfg);

  const auto checks = run_checks(cfg, traj, out);
  fpme::write_summary_csv((out / "summary.csv").string(), checks.rows);

  std::vector<double> ts, mass, sup, energy;
  for (const auto& rec : traj.records) {
    ts.push_back(rec.t);
    mass.push_back(rec.mass);
    double mx = 0.0;
    for (double v : rec.u) mx = std::max(mx, v);
    sup.push_back(mx);
    energy.push_back(
        std::pow(fpme::weighted_norm(rec.u, cfg.m + 1.0, traj.rho, g), cfg.m + 1.0) /
        (cfg.m + 1.0));
  }
  fpme::write_plot_dat((out / "plots" / "mass.dat").string(), ts, mass);
  fpme::write_plot_dat((out / "plots" / "sup_norm.dat").string(), ts, sup);
  fpme::write_plot_dat((out / "plots" / "energy.dat").string(), ts, energy);
  if (checks.potential_available && traj.records.size() >= 2) {
    const auto slice = [&](const fpme::Field& U, const std::string& name) {
      std::vector<double> xs, ys;
      const std::size_t iy = g.d == 1 ? 0 : g.n / 2;
      for (std::size_t ix = 0; ix < g.n; ++ix) {
        xs.push_back(g.axis_coord(ix));
        ys.push_back(U[g.index_of(ix, iy)]);
      }
      fpme::write_plot_dat((out / "plots" / name).string(), xs, ys);
    };
    slice(checks.potential.potentials[1], "potential_slice_first.dat");
    slice(checks.potential.potentials.back(), "potential_slice_last.dat");
  }

  int failed = 0;
  for (const auto& row : checks.rows) {
    if (row.status == "fail") ++failed;
    if (verbose)
      std::cout << row.check << ": " << row.status
                << (row.status == "skip" ? " (" + row.note + ")" : "") << "\n";
  }
  std::cout << "wrote " << out.string() << " (" << checks.rows.size() << " checks, " << failed
            << " failed)" << std::endl;
  return 0;
}

// ---------------------------------------------------------------------------
// fit-exponents
// ---------------------------------------------------------------------------

int cmd_fit_exponents(const std::string& config_path, const std::string& out_dir,
                      const std::string& masses_text, const std::string& window_text) {
  const auto cfg = load_config(config_path);
  const auto masses = parse_double_list(masses_text, "--masses");
  const auto window = parse_double_list(window_text, "--window");
  if (window.size() != 2) throw std::invalid_argument("--window: expected 'lo,hi'");

  const auto g = fpme::make_grid(cfg.d, cfg.n, cfg.L);
  const double base_mass = cfg.measure.total_mass(g);
  if (!(base_mass > 0.0))
    throw std::invalid_argument("fit-exponents: the configured measure has no mass");

  std::vector<fpme::Trajectory> runs(masses.size());
  parallel_for(masses.size(), thread_budget(), [&](std::size_t i) {
    fpme::MeasureSpec mu = cfg.measure;
    const double scale = masses[i] / base_mass;
    for (auto& a : mu.atoms) a.mass *= scale;
    for (auto& v : mu.density) v *= scale;
    runs[i] = fpme::evolve(mu, cfg.mollify_eps, cfg.solver, cfg.weight, g);
  });

  const auto fit = fpme::smoothing_fit(runs, {window[0], window[1]});

  fpme::DiagnosticsReport rep;
  rep.check = "smoothing_fit";
  rep.parameters["masses"] = masses;
  rep.parameters["window"] = window;
  rep.parameters["d"] = cfg.d;
  rep.parameters["s"] = cfg.s;
  rep.parameters["m"] = cfg.m;
  rep.parameters["gamma"] = cfg.weight.gamma;
  rep.add_result("alpha_hat", fit.alpha_hat);
  rep.add_result("beta_hat", fit.beta_hat);
  rep.add_result("alpha_theory", fit.alpha_theory);
  rep.add_result("beta_theory", fit.beta_theory);
  rep.add_result("log_k", fit.log_k);
  rep.add_result("n_points", double(fit.n_points));
  rep.add_violation("fit_residual_rms", fit.residual_rms, 0.02);

  const fs::path out(out_dir);
  fs::create_directories(out / "plots");
  fs::create_directories(out / "reports");
  fpme::write_json_file((out / "reports" / "exponent_fit.json").string(), rep.to_json());
  fpme::write_summary_csv((out / "summary.csv").string(), {fpme::summary_row(rep)});
  for (std::size_t i = 0; i < runs.size(); ++i) {
    std::vector<double> ts, sup;
    for (const auto& rec : runs[i].records) {
      if (!(rec.t > 0.0)) continue;
      ts.push_back(rec.t);
      double mx = 0.0;
      for (double v : rec.u) mx = std::max(mx, v);
      sup.push_back(mx);
    }
    fpme::write_plot_dat(
        (out / "plots" / ("supnorm_mass" + std::to_string(i) + ".dat")).string(), ts, sup);
  }
  std::cout << "alpha_hat=" << fit.alpha_hat << " (theory " << fit.alpha_theory << "), beta_hat="
            << fit.beta_hat << " (theory " << fit.beta_theory << "), rms=" << fit.residual_rms
            << std::endl;
  return 0;
}

// ---------------------------------------------------------------------------
// check-inequalities
// ---------------------------------------------------------------------------

int cmd_check_inequalities(const std::string& config_path, const std::string& out_dir, int count,
                           long seed_override, const std::string& q_text, double alpha,
                           double p) {
  auto cfg = load_config(config_path);
  if (seed_override >= 0) cfg.seed = static_cast<unsigned long>(seed_override);
  const auto qs = parse_double_list(q_text, "--q");
  const auto g = fpme::make_grid(cfg.d, cfg.n, cfg.L);

  struct Row {
    double sv_min_gap = 0.0;
    double ckn_ratio = 0.0;
    bool ok = true;
  };
  std::vector<Row> rows(count);
  parallel_for(std::size_t(count), thread_budget(), [&](std::size_t k) {
    const auto v = fpme::smooth_positive_field(g, unsigned(cfg.seed + 1000 + k));
    Row row;
    row.sv_min_gap = fpme::kInfP;
    for (double q : qs) {
      const auto rep = fpme::stroock_varopoulos_check(v, q, cfg.s, g);
      row.sv_min_gap = std::min(row.sv_min_gap, rep.results["gap"].get<double>());
      row.ok = row.ok && rep.pass;
    }
    const auto ck = fpme::ckn_check(v, alpha, p, cfg.weight, g, cfg.s);
    row.ckn_ratio = ck.results["ratio"].get<double>();
    row.ok = row.ok && ck.pass;
    rows[k] = row;
  });

  const fs::path out(out_dir);
  fs::create_directories(out);
  std::ostringstream csv;
  csv << "sample,sv_min_gap,ckn_ratio,status\n";
  double min_gap = fpme::kInfP, rmin = fpme::kInfP, rmax = 0.0;
  int failures = 0;
  for (int k = 0; k < count; ++k) {
    csv << k << ',' << fpme::fmt_full(rows[k].sv_min_gap) << ','
        << fpme::fmt_full(rows[k].ckn_ratio) << ',' << (rows[k].ok ? "pass" : "FAILED") << '\n';
    min_gap = std::min(min_gap, rows[k].sv_min_gap);
    rmin = std::min(rmin, rows[k].ckn_ratio);
    rmax = std::max(rmax, rows[k].ckn_ratio);
    if (!rows[k].ok) ++failures;
  }
  fpme::write_text_file((out / "inequalities.csv").string(), csv.str());

  fpme::DiagnosticsReport sv;
  sv.check = "stroock_varopoulos";
  sv.parameters["count"] = count;
  sv.parameters["q"] = qs;
  sv.parameters["seed"] = cfg.seed;
  sv.add_result("min_gap", min_gap);
  sv.add_violation("negative_gap", std::max(0.0, -min_gap), 1e-9);
  write_report(out, sv);

  fpme::DiagnosticsReport ck;
  ck.check = "ckn";
  ck.parameters["count"] = count;
  ck.parameters["alpha"] = alpha;
  ck.parameters["p"] = p;
  ck.parameters["seed"] = cfg.seed;
  ck.add_result("ratio_min", rmin);
  ck.add_result("ratio_max", rmax);
  ck.add_violation("nonfinite_ratio", std::isfinite(rmax) ? 0.0 : fpme::kInfP, 0.0);
  write_report(out, ck);

  fpme::write_summary_csv((out / "summary.csv").string(),
                          {fpme::summary_row(sv), fpme::summary_row(ck)});
  std::cout << count << " samples, " << failures << " failures" << std::endl;
  return failures == 0 ? 0 : 1;
}

// ---------------------------------------------------------------------------
// dual-diagnostics
// ---------------------------------------------------------------------------

int cmd_dual_diagnostics(const std::string& config_path, const std::string& out_dir,
                         long seed_override, int pairs) {
  auto cfg = load_config(config_path);
  if (seed_override >= 0) cfg.seed = static_cast<unsigned long>(seed_override);
  const auto g = fpme::make_grid(cfg.d, cfg.n, cfg.L);
  if (g.size() > fpme::kDenseSpectrumLimit)
    throw std::invalid_argument("dual-diagnostics: grid exceeds the dense spectral limit of " +
                                std::to_string(fpme::kDenseSpectrumLimit) + " nodes");
  const fs::path out(out_dir);
  std::vector<fpme::SummaryRow> rows;

  auto op = fpme::make_weighted_operator(cfg.weight, g, cfg.s, cfg.solver.method);

  // self-adjointness of A in the weighted inner product on random pairs
  {
    fpme::DiagnosticsReport rep;
    rep.check = "weighted_symmetry";
    rep.parameters["pairs"] = pairs;
    rep.parameters["seed"] = cfg.seed;
    double worst = 0.0;
    for (int k = 0; k < pairs; ++k) {
      const auto u = fpme::smooth_positive_field(g, unsigned(cfg.seed + 100 + 2 * k));
      const auto v = fpme::smooth_positive_field(g, unsigned(cfg.seed + 101 + 2 * k));
      const double a = fpme::weighted_inner(fpme::apply_A(op, u), v, op.rho, g);
      const double b = fpme::weighted_inner(u, fpme::apply_A(op, v), op.rho, g);
      worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(a)));
    }
    rep.add_violation("symmetry_defect", worst, 1e-12);
    write_report(out, rep);
    rows.push_back(fpme::summary_row(rep));
  }

  fpme::materialize_spectrum(op);
  {
    fpme::DiagnosticsReport rep;
    rep.check = "spectrum_nonnegativity";
    rep.add_result("min_eigenvalue", op.eigenvalues.front());
    rep.add_result("max_eigenvalue", op.eigenvalues.back());
    rep.add_violation("negative_eigenvalue", std::max(0.0, -op.eigenvalues.front()), 1e-10);
    write_report(out, rep);
    rows.push_back(fpme::summary_row(rep));
  }

  {
    fpme::DiagnosticsReport rep;
    rep.check = "semigroup_properties";
    const auto v = fpme::smooth_positive_field(g, unsigned(cfg.seed + 500));
    const auto sup_diff = [](const fpme::Field& a, const fpme::Field& b) {
      double w = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) w = std::max(w, std::abs(a[i] - b[i]));
      return w;
    };
    const auto at0 = fpme::semigroup_step(op, v, 0.0);
    rep.add_violation("identity_at_zero", sup_diff(at0, v), 1e-10);
    const auto both = fpme::semigroup_step(op, fpme::semigroup_step(op, v, 0.2), 0.3);
    const auto once = fpme::semigroup_step(op, v, 0.5);
    rep.add_violation("composition_defect", sup_diff(both, once), 1e-10);
    const fpme::Field ones(g.size(), 1.0);
    rep.add_violation("constants_moved", sup_diff(fpme::semigroup_step(op, ones, 0.4), ones),
                      1e-10);
    const auto evolved = fpme::semigroup_step(op, v, 0.4);
    const double mass_drift =
        std::abs(fpme::weighted_integral(evolved, op.rho, g) -
                 fpme::weighted_integral(v, op.rho, g)) /
        std::abs(fpme::weighted_integral(v, op.rho, g));
    rep.add_violation("weighted_mass_drift", mass_drift, 1e-10);
    double min_val = fpme::kInfP;
    for (double x : evolved) min_val = std::min(min_val, x);
    rep.add_violation("negative_part", std::max(0.0, -min_val), 1e-10);
    write_report(out, rep);
    rows.push_back(fpme::summary_row(rep));
  }

  // backward dual solve on an internal fine-recorded run of the config data
  {
    const double T = 0.12;
    const int nint = 16, sub = 4;
    const double dq = T / double(nint * sub);
    const double h = 2.0 * dq;
    fpme::SolverConfig scfg = cfg.solver;
    scfg.record_times.clear();
    for (int k = 1; k <= nint * sub + 2; ++k) scfg.record_times.push_back(dq * double(k));
    scfg.dt_init = 2e-5;
    scfg.dt_max = std::min(scfg.dt_max, 2.5e-4);
    const auto traj = fpme::evolve(cfg.measure, cfg.mollify_eps, scfg, cfg.weight, g);

    const auto coef = fpme::build_coefficient(traj, traj, h, nint, T, 1e-3);
    const auto psi = fpme::uniqueness_psi_bank(g).front();
    const double t_check = T / 2.0;
    const auto dual = fpme::solve_dual(coef, psi, op, t_check, sub);

    fpme::DiagnosticsReport mass_rep;
    mass_rep.check = "dual_mass_conservation";
    const double mT = fpme::weighted_integral(dual.records.back().psi, op.rho, g);
    double drift = 0.0;
    for (const auto& rec : dual.records)
      drift = std::max(drift, std::abs(fpme::weighted_integral(rec.psi, op.rho, g) - mT) /
                                  std::abs(mT));
    mass_rep.add_result("final_mass", mT);
    mass_rep.add_violation("rel_mass_drift", drift, 1e-9);
    write_report(out, mass_rep);
    rows.push_back(fpme::summary_row(mass_rep));

    const auto rep = fpme::duality_identity_check(traj, traj, h, coef, dual, t_check);
    write_report(out, rep);
    rows.push_back(fpme::summary_row(rep));
  }

  fpme::write_summary_csv((out / "summary.csv").string(), rows);
  int failed = 0;
  for (const auto& row : rows)
    if (row.status == "fail") ++failed;
  std::cout << rows.size() << " checks, " << failed << " failed" << std::endl;
  return 0;
}

// ---------------------------------------------------------------------------
// trace / report
// ---------------------------------------------------------------------------

int cmd_trace(const std::string& run_dir, std::string out_dir) {
  const auto traj = fpme::load_run(run_dir);
  const auto tr = fpme::initial_trace(traj);
  if (out_dir.empty()) out_dir = (fs::path(run_dir) / "reports").string();
  fs::create_directories(out_dir);

  ordered_json j;
  j["check"] = "initial_trace";
  j["mass"] = tr.mass;
  j["t_trace"] = tr.t_trace;
  j["gap_times"] = tr.gap_times;
  j["gaps"] = tr.gaps;
  j["certificate"] = tr.certificate;
  j["measure"] = fpme::measure_to_json(tr.trace);
  fpme::write_json_file((fs::path(out_dir) / "trace.json").string(), j);
  std::cout << "trace mass=" << tr.mass << " t=" << tr.t_trace
            << " certificate=" << (tr.certificate ? "true" : "false") << std::endl;
  return 0;
}

int cmd_report(const std::vector<std::string>& run_dirs, const std::string& out_dir) {
  std::ostringstream csv;
  csv << "run,check,status,value,tolerance,note\n";
  for (const auto& dir : run_dirs) {
    const fs::path summary = fs::path(dir) / "summary.csv";
    if (!fs::exists(summary))
      throw std::invalid_argument("report: '" + dir + "' has no summary.csv");
    std::ifstream in(summary);
    std::string line;
    std::getline(in, line);  // header
    const std::string run = fs::path(dir).filename().string();
    while (std::getline(in, line))
      if (!line.empty()) csv << run << ',' << line << '\n';
  }
  fs::create_directories(out_dir);
  const fs::path out = fs::path(out_dir) / "summary.csv";
  fpme::write_text_file(out.string(), csv.str());
  std::cout << "wrote " << out.string() << std::endl;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weighted fractional porous-medium laboratory"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", masses_text, window_text = "1e-3,1e-1";
  std::string q_text = "1.5,2,3", trace_run, trace_out;
  std::vector<std::string> report_dirs;
  long seed_override = -1;
  bool verbose = false;
  int count = 100, pairs = 50;
  double alpha = 1.0, p = 2.0;

  auto* sim = app.add_subcommand("simulate", "run data -> solve -> checks from a config");
  sim->add_option("--config", config_path, "experiment config JSON")->required();
  sim->add_option("--out", out_dir, "output directory");
  sim->add_option("--seed", seed_override, "override the config seed");
  sim->add_flag("--verbose", verbose, "print one line per check");

  auto* fit = app.add_subcommand("fit-exponents", "fit decay exponents over a mass ladder");
  fit->add_option("--config", config_path, "experiment config JSON")->required();
  fit->add_option("--out", out_dir, "output directory");
  fit->add_option("--masses", masses_text, "comma-separated total masses")->required();
  fit->add_option("--window", window_text, "fit window 'lo,hi'");

  auto* ineq = app.add_subcommand("check-inequalities", "randomized inequality sweeps");
  ineq->add_option("--config", config_path, "experiment config JSON")->required();
  ineq->add_option("--out", out_dir, "output directory");
  ineq->add_option("--count", count, "number of sampled fields");
  ineq->add_option("--seed", seed_override, "override the config seed");
  ineq->add_option("--q", q_text, "comma-separated exponents");
  ineq->add_option("--alpha", alpha, "interpolation parameter");
  ineq->add_option("--p", p, "weighted base norm exponent");

  auto* dual = app.add_subcommand("dual-diagnostics", "operator, semigroup and duality checks");
  dual->add_option("--config", config_path, "experiment config JSON")->required();
  dual->add_option("--out", out_dir, "output directory");
  dual->add_option("--seed", seed_override, "override the config seed");
  dual->add_option("--pairs", pairs, "random pairs for the symmetry check");

  auto* trace = app.add_subcommand("trace", "recover the initial measure from a run directory");
  trace->add_option("run_dir", trace_run, "saved run directory")->required();
  trace->add_option("--out", trace_out, "output directory (default: run_dir/reports)");

  auto* report = app.add_subcommand("report", "aggregate run summaries into one CSV");
  report->add_option("run_dirs", report_dirs, "run directories")->required();
  report->add_option("--out", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help() << std::endl;
    return 64;
  }

  try {
    if (sim->parsed()) return cmd_simulate(config_path, out_dir, seed_override, verbose);
    if (fit->parsed()) return cmd_fit_exponents(config_path, out_dir, masses_text, window_text);
    if (ineq->parsed())
      return cmd_check_inequalities(config_path, out_dir, count, seed_override, q_text, alpha, p);
    if (dual->parsed()) return cmd_dual_diagnostics(config_path, out_dir, seed_override, pairs);
    if (trace->parsed()) return cmd_trace(trace_run, trace_out);
    if (report->parsed()) return cmd_report(report_dirs, out_dir);
  } catch (const fpme::SolverAbort& e) {
    std::cerr << "solver abort: " << e.what() << std::endl;
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 2;
  }
  return 64;
}
