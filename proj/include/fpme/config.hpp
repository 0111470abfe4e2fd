#pragma once

/// \file config.hpp
/// \brief ExperimentConfig: one JSON document describing problem, grid, data,
///        solver and checks, with a strict parser and the hypothesis validator.
///
/// Parsing is strict: unknown keys are rejected by name so that fixture typos
/// surface immediately instead of silently running defaults. The validator
/// re-throws the weight-hypothesis clauses verbatim; the CLI forwards them on
/// exit 2.

#include <string>
#include <vector>

#include <json.hpp>

#include "fpme/measures.hpp"
#include "fpme/solver.hpp"
#include "fpme/weights.hpp"

namespace fpme {

/// One entry of the checks block: a diagnostic name plus per-check overrides.
struct CheckSpec {
  std::string name;
  ordered_json options = ordered_json::object();
};

struct ExperimentConfig {
  int d = 1;
  double s = 0.4;
  double m = 2.0;
  WeightSpec weight;
  std::size_t n = 256;
  double L = 10.0;
  MeasureSpec measure;
  double mollify_eps = 0.0;
  SolverConfig solver;  ///< m, s and method are mirrored from the blocks above
  std::vector<CheckSpec> checks;
  unsigned long seed = 0;
};

namespace detail {

inline void expect_keys(const ordered_json& block, const std::string& where,
                        std::initializer_list<const char*> allowed) {
  if (!block.is_object())
    throw std::invalid_argument("config " + where + ": expected an object");
  for (const auto& item : block.items()) {
    bool known = false;
    for (const char* k : allowed)
      if (item.key() == k) {
        known = true;
        break;
      }
    if (!known)
      throw std::invalid_argument("config " + where + ": unknown key '" + item.key() + "'");
  }
}

inline const ordered_json& require_key(const ordered_json& block, const std::string& where,
                                       const char* key) {
  if (!block.contains(key))
    throw std::invalid_argument("config " + where + ": missing required key '" +
                                std::string(key) + "'");
  return block.at(key);
}

template <typename T>
inline T get_or(const ordered_json& block, const char* key, T fallback) {
  return block.contains(key) ? block.at(key).get<T>() : fallback;
}

}  // namespace detail

inline std::string to_config_string(FracMethod m) {
  return m == FracMethod::Spectral ? "spectral" : "quadrature";
}

inline FracMethod frac_method_from_string(const std::string& s) {
  if (s == "spectral") return FracMethod::Spectral;
  if (s == "quadrature") return FracMethod::Quadrature;
  throw std::invalid_argument("config solver block: unknown method '" + s +
                              "' (expected 'spectral' or 'quadrature')");
}

inline ordered_json measure_to_json(const MeasureSpec& mu) {
  ordered_json j;
  j["atoms"] = ordered_json::array();
  for (const auto& a : mu.atoms)
    j["atoms"].push_back(ordered_json{{"x", a.x}, {"y", a.y}, {"mass", a.mass}});
  if (!mu.density.empty()) j["density"] = mu.density;
  return j;
}

inline MeasureSpec measure_from_json(const ordered_json& j) {
  detail::expect_keys(j, "measure block", {"atoms", "density"});
  MeasureSpec mu;
  if (j.contains("atoms")) {
    if (!j.at("atoms").is_array())
      throw std::invalid_argument("config measure block: 'atoms' must be an array");
    for (const auto& ja : j.at("atoms")) {
      detail::expect_keys(ja, "measure atom", {"x", "y", "mass"});
      Atom a;
      a.x = detail::require_key(ja, "measure atom", "x").get<double>();
      a.y = detail::get_or(ja, "y", 0.0);
      a.mass = detail::require_key(ja, "measure atom", "mass").get<double>();
      mu.atoms.push_back(a);
    }
  }
  if (j.contains("density")) {
    if (!j.at("density").is_array())
      throw std::invalid_argument("config measure block: 'density' must be an array");
    mu.density = j.at("density").get<Field>();
  }
  return mu;
}

inline ExperimentConfig parse_experiment_config(const ordered_json& j) {
  detail::expect_keys(j, "document", {"problem", "grid", "data", "solver", "checks", "seed"});
  ExperimentConfig cfg;

  const auto& prob = detail::require_key(j, "document", "problem");
  detail::expect_keys(prob, "problem block",
                      {"d", "s", "m", "gamma", "gamma0", "c", "C", "profile", "eta"});
  cfg.d = detail::require_key(prob, "problem block", "d").get<int>();
  cfg.s = detail::require_key(prob, "problem block", "s").get<double>();
  cfg.m = detail::require_key(prob, "problem block", "m").get<double>();
  cfg.weight.gamma = detail::get_or(prob, "gamma", 0.0);
  cfg.weight.gamma0 = detail::get_or(prob, "gamma0", 0.0);
  cfg.weight.c = detail::get_or(prob, "c", 1.0);
  cfg.weight.C = detail::get_or(prob, "C", 1.0);
  cfg.weight.profile =
      weight_profile_from_string(detail::get_or<std::string>(prob, "profile", "pure_power"));
  cfg.weight.eta = detail::get_or(prob, "eta", 0.0);

  const auto& grid = detail::require_key(j, "document", "grid");
  detail::expect_keys(grid, "grid block", {"n", "L"});
  cfg.n = detail::require_key(grid, "grid block", "n").get<std::size_t>();
  cfg.L = detail::require_key(grid, "grid block", "L").get<double>();

  const auto& data = detail::require_key(j, "document", "data");
  detail::expect_keys(data, "data block", {"measure", "mollify_eps"});
  cfg.measure = measure_from_json(detail::require_key(data, "data block", "measure"));
  cfg.mollify_eps = detail::require_key(data, "data block", "mollify_eps").get<double>();

  const auto& solver = detail::require_key(j, "document", "solver");
  detail::expect_keys(solver, "solver block",
                      {"output_times", "dt_init", "dt_max", "dt_growth", "newton_tol",
                       "newton_max_iter", "max_backoff", "positivity_band", "method"});
  cfg.solver.record_times =
      detail::require_key(solver, "solver block", "output_times").get<std::vector<double>>();
  if (cfg.solver.record_times.empty())
    throw std::invalid_argument("config solver block: output_times must be nonempty");
  for (std::size_t k = 0; k < cfg.solver.record_times.size(); ++k) {
    const bool increasing = k == 0 || cfg.solver.record_times[k] > cfg.solver.record_times[k - 1];
    if (!(cfg.solver.record_times[k] > 0.0) || !increasing)
      throw std::invalid_argument(
          "config solver block: output_times must be positive and strictly increasing");
  }
  cfg.solver.dt_init = detail::get_or(solver, "dt_init", cfg.solver.dt_init);
  cfg.solver.dt_max = detail::get_or(solver, "dt_max", cfg.solver.dt_max);
  cfg.solver.dt_growth = detail::get_or(solver, "dt_growth", cfg.solver.dt_growth);
  cfg.solver.newton_tol = detail::get_or(solver, "newton_tol", cfg.solver.newton_tol);
  cfg.solver.newton_max_iter =
      detail::get_or(solver, "newton_max_iter", cfg.solver.newton_max_iter);
  cfg.solver.max_backoff = detail::get_or(solver, "max_backoff", cfg.solver.max_backoff);
  cfg.solver.positivity_band =
      detail::get_or(solver, "positivity_band", cfg.solver.positivity_band);
  cfg.solver.method =
      frac_method_from_string(detail::get_or<std::string>(solver, "method", "spectral"));
  cfg.solver.m = cfg.m;
  cfg.solver.s = cfg.s;

  if (j.contains("checks")) {
    if (!j.at("checks").is_array())
      throw std::invalid_argument("config checks block: expected an array");
    for (const auto& jc : j.at("checks")) {
      if (!jc.is_object() || !jc.contains("name"))
        throw std::invalid_argument("config checks block: each entry needs a 'name'");
      CheckSpec spec;
      spec.name = jc.at("name").get<std::string>();
      for (const auto& item : jc.items())
        if (item.key() != "name") spec.options[item.key()] = item.value();
      cfg.checks.push_back(std::move(spec));
    }
  }
  cfg.seed = detail::get_or<unsigned long>(j, "seed", 0);
  return cfg;
}

/// Normalized document with every default materialized; parsing it back
/// reproduces the same configuration.
inline ordered_json config_to_json(const ExperimentConfig& cfg) {
  ordered_json j;
  j["problem"] = ordered_json{{"d", cfg.d},
                              {"s", cfg.s},
                              {"m", cfg.m},
                              {"gamma", cfg.weight.gamma},
                              {"gamma0", cfg.weight.gamma0},
                              {"c", cfg.weight.c},
                              {"C", cfg.weight.C},
                              {"profile", to_string(cfg.weight.profile)},
                              {"eta", cfg.weight.eta}};
  j["grid"] = ordered_json{{"n", cfg.n}, {"L", cfg.L}};
  j["data"] =
      ordered_json{{"measure", measure_to_json(cfg.measure)}, {"mollify_eps", cfg.mollify_eps}};
  j["solver"] = ordered_json{{"output_times", cfg.solver.record_times},
                             {"dt_init", cfg.solver.dt_init},
                             {"dt_max", cfg.solver.dt_max},
                             {"dt_growth", cfg.solver.dt_growth},
                             {"newton_tol", cfg.solver.newton_tol},
                             {"newton_max_iter", cfg.solver.newton_max_iter},
                             {"max_backoff", cfg.solver.max_backoff},
                             {"positivity_band", cfg.solver.positivity_band},
                             {"method", to_config_string(cfg.solver.method)}};
  j["checks"] = ordered_json::array();
  for (const auto& spec : cfg.checks) {
    ordered_json jc;
    jc["name"] = spec.name;
    for (const auto& item : spec.options.items()) jc[item.key()] = item.value();
    j["checks"].push_back(jc);
  }
  j["seed"] = cfg.seed;
  return j;
}

/// The theorem-hypothesis validator: throws std::invalid_argument naming the
/// violated clause (d > 2s; gamma in [0,2s) and [0,d-2s]; gamma0 in [0,gamma];
/// m > 1), then checks the grid and data are constructible.
inline void validate_experiment(const ExperimentConfig& cfg) {
  validate_weight_hypotheses(cfg.weight, cfg.d, cfg.s);
  if (!(cfg.m > 1.0))
    throw std::invalid_argument("hypothesis violated: m > 1 (m=" + std::to_string(cfg.m) + ")");
  const Grid g = make_grid(cfg.d, cfg.n, cfg.L);
  cfg.measure.validate(g);
  if (!cfg.measure.atoms.empty() && !(cfg.mollify_eps >= 2.0 * g.h))
    throw std::invalid_argument("mollifier: eps must be at least 2*spacing to be resolvable");
}

}  // namespace fpme
