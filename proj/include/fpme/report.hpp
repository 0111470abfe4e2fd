#pragma once

/// \file report.hpp
/// \brief DiagnosticsReport: named scalar results plus tolerance-gated violations.
///
/// Every verification in the library returns one of these. A report passes
/// iff every recorded violation is within its tolerance, so `pass` can never
/// disagree with the violation table.

#include <string>

#include <json.hpp>

namespace fpme {

using ordered_json = nlohmann::ordered_json;

struct DiagnosticsReport {
  std::string check;
  ordered_json parameters = ordered_json::object();
  ordered_json results = ordered_json::object();
  ordered_json violations = ordered_json::array();
  bool pass = true;
  std::string note;

  void add_result(const std::string& name, double value) { results[name] = value; }
  void add_result(const std::string& name, const ordered_json& value) { results[name] = value; }

  /// Record a measured violation magnitude against its tolerance.
  /// Convention: `value` is oriented so that value <= tolerance means the
  /// property holds (e.g. worst nodewise excess, |residual|, max(0, -gap)).
  /// The magnitude is also mirrored into `results` so callers can read every
  /// measured number from one place.
  void add_violation(const std::string& name, double value, double tolerance) {
    const bool ok = value <= tolerance;
    violations.push_back(ordered_json{
        {"name", name}, {"value", value}, {"tolerance", tolerance}, {"pass", ok}});
    results[name] = value;
    pass = pass && ok;
  }

  ordered_json to_json() const {
    ordered_json j;
    j["check"] = check;
    j["parameters"] = parameters;
    j["results"] = results;
    j["violations"] = violations;
    j["pass"] = pass;
    if (!note.empty()) j["note"] = note;
    return j;
  }
};

}  // namespace fpme
