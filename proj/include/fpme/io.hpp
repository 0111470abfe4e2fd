#pragma once

/// \file io.hpp
/// \brief Run-directory persistence: state CSVs, manifest, reports, summary
///        rows and two-column plot data.
///
/// Every number is printed with %.17g so files are byte-deterministic and
/// doubles round-trip exactly; nothing here writes timestamps or hostnames.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fpme/config.hpp"
#include "fpme/report.hpp"
#include "fpme/solver.hpp"

namespace fpme {

inline std::string fmt_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("io: cannot open '" + path + "' for writing");
  out << text;
}

inline void write_json_file(const std::string& path, const ordered_json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

inline ordered_json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("io: cannot open '" + path + "' for reading");
  try {
    return ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("io: '" + path + "' is not valid JSON: " + e.what());
  }
}

/// Columns: x[,y],u,cum_um. Time and mass live in the manifest.
inline void write_state_csv(const std::string& path, const Grid& g, const StateRecord& rec) {
  if (rec.u.size() != g.size())
    throw std::invalid_argument("io: state record does not match the grid");
  std::ostringstream out;
  out << (g.d == 1 ? "x,u,cum_um\n" : "x,y,u,cum_um\n");
  for (std::size_t i = 0; i < g.size(); ++i) {
    out << fmt_full(g.node_coord(i, 0)) << ',';
    if (g.d == 2) out << fmt_full(g.node_coord(i, 1)) << ',';
    out << fmt_full(rec.u[i]) << ','
        << fmt_full(rec.cum_um.empty() ? 0.0 : rec.cum_um[i]) << '\n';
  }
  write_text_file(path, out.str());
}

inline StateRecord read_state_csv(const std::string& path, const Grid& g) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("io: cannot open '" + path + "' for reading");
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("io: '" + path + "' is empty");
  StateRecord rec;
  rec.u.reserve(g.size());
  rec.cum_um.reserve(g.size());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    for (char& ch : line)
      if (ch == ',') ch = ' ';
    std::istringstream ls(line);
    double x = 0.0, y = 0.0, u = 0.0, cum = 0.0;
    const bool ok = g.d == 1 ? bool(ls >> x >> u >> cum) : bool(ls >> x >> y >> u >> cum);
    if (!ok) throw std::invalid_argument("io: malformed row in '" + path + "'");
    rec.u.push_back(u);
    rec.cum_um.push_back(cum);
  }
  if (rec.u.size() != g.size())
    throw std::invalid_argument("io: '" + path + "' row count does not match the grid");
  return rec;
}

/// Two whitespace-separated columns, gnuplot-ready.
inline void write_plot_dat(const std::string& path, const std::vector<double>& xs,
                           const std::vector<double>& ys) {
  if (xs.size() != ys.size())
    throw std::invalid_argument("io: plot columns have different lengths");
  std::ostringstream out;
  for (std::size_t i = 0; i < xs.size(); ++i)
    out << fmt_full(xs[i]) << ' ' << fmt_full(ys[i]) << '\n';
  write_text_file(path, out.str());
}

struct SummaryRow {
  std::string check;
  std::string status;  ///< "pass", "fail" or "skip"
  double value = 0.0;
  double tolerance = 0.0;
  std::string note;
};

/// Condenses a report to its worst violation (largest value/tolerance ratio).
inline SummaryRow summary_row(const DiagnosticsReport& rep) {
  SummaryRow row;
  row.check = rep.check;
  row.status = rep.pass ? "pass" : "fail";
  row.note = rep.note;
  double worst_ratio = -1.0;
  for (const auto& v : rep.violations) {
    const double value = v.at("value").get<double>();
    const double tol = v.at("tolerance").get<double>();
    const double ratio = value / std::max(tol, 1e-300);
    if (ratio > worst_ratio) {
      worst_ratio = ratio;
      row.value = value;
      row.tolerance = tol;
    }
  }
  return row;
}

inline void write_summary_csv(const std::string& path, const std::vector<SummaryRow>& rows) {
  const auto sanitize = [](std::string s) {
    for (char& ch : s)
      if (ch == ',' || ch == '\n') ch = ';';
    return s;
  };
  std::ostringstream out;
  out << "check,status,value,tolerance,note\n";
  for (const auto& r : rows)
    out << sanitize(r.check) << ',' << sanitize(r.status) << ',' << fmt_full(r.value) << ','
        << fmt_full(r.tolerance) << ',' << sanitize(r.note) << '\n';
  write_text_file(path, out.str());
}

/// Reconstructs the configuration a trajectory ran under (checks and seed are
/// not recoverable from the run itself and stay empty).
inline ExperimentConfig config_of_trajectory(const Trajectory& traj) {
  ExperimentConfig cfg;
  cfg.d = traj.grid.d;
  cfg.s = traj.config.s;
  cfg.m = traj.config.m;
  cfg.weight = traj.weight;
  cfg.n = traj.grid.n;
  cfg.L = traj.grid.L;
  cfg.measure = traj.initial;
  cfg.mollify_eps = traj.mollify_eps;
  cfg.solver = traj.config;
  return cfg;
}

/// Writes manifest.json plus one state_t{index}.csv per record. When the run
/// came from a config file, pass it so the manifest echoes checks and seed.
inline void save_run(const std::string& dir, const Trajectory& traj,
                     const ExperimentConfig* echo = nullptr) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  ordered_json manifest;
  manifest["generator"] = "fpme";
  manifest["format"] = 1;
  manifest["config"] = config_to_json(echo ? *echo : config_of_trajectory(traj));
  manifest["records"] = ordered_json::array();
  for (std::size_t k = 0; k < traj.records.size(); ++k) {
    const std::string file = "state_t" + std::to_string(k) + ".csv";
    write_state_csv((fs::path(dir) / file).string(), traj.grid, traj.records[k]);
    manifest["records"].push_back(ordered_json{{"index", k},
                                               {"t", traj.records[k].t},
                                               {"file", file},
                                               {"mass", traj.records[k].mass}});
  }
  manifest["stats"] = ordered_json{{"total_steps", traj.total_steps},
                                   {"total_newton_iters", traj.total_newton_iters},
                                   {"max_step_rel_mass_drift", traj.max_step_rel_mass_drift}};
  write_json_file((fs::path(dir) / "manifest.json").string(), manifest);
}

inline Trajectory load_run(const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path manifest_path = fs::path(dir) / "manifest.json";
  if (!fs::exists(manifest_path))
    throw std::invalid_argument("io: run directory '" + dir + "' has no manifest.json");
  const auto manifest = read_json_file(manifest_path.string());
  const auto cfg = parse_experiment_config(manifest.at("config"));

  Trajectory traj;
  traj.grid = make_grid(cfg.d, cfg.n, cfg.L);
  traj.weight = cfg.weight;
  traj.rho = eval_weight(cfg.weight, traj.grid);
  traj.config = cfg.solver;
  traj.initial = cfg.measure;
  traj.mollify_eps = cfg.mollify_eps;

  const double zpow = (cfg.m + 1.0) / 2.0;
  for (const auto& jr : manifest.at("records")) {
    const fs::path file = fs::path(dir) / jr.at("file").get<std::string>();
    StateRecord rec = read_state_csv(file.string(), traj.grid);
    rec.t = jr.at("t").get<double>();
    rec.mass = jr.at("mass").get<double>();
    rec.z.resize(rec.u.size());
    for (std::size_t i = 0; i < rec.u.size(); ++i)
      rec.z[i] = std::pow(std::max(rec.u[i], 0.0), zpow);
    traj.records.push_back(std::move(rec));
  }
  if (traj.records.empty())
    throw std::invalid_argument("io: run directory '" + dir + "' lists no records");
  traj.u0 = traj.records.front().u;

  if (manifest.contains("stats")) {
    const auto& st = manifest.at("stats");
    traj.total_steps = st.at("total_steps").get<long long>();
    traj.total_newton_iters = st.at("total_newton_iters").get<long long>();
    traj.max_step_rel_mass_drift = st.at("max_step_rel_mass_drift").get<double>();
  }
  return traj;
}

}  // namespace fpme
