#pragma once

#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

namespace mwsq {

/// One verifier outcome. Soft checks only fail a run in strict mode.
struct Check {
  std::string name;
  bool passed = true;
  double value = 0.0;
  double limit = 0.0;
  bool hard = true;
  /// Configuration reproducing a failure; null when the check passed.
  nlohmann::json witness;

  bool operator==(const Check&) const = default;
};

/// Flat numeric table with a fixed column schema per experiment kind.
struct MetricsTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::size_t column_index(const std::string& name) const;
  std::vector<double> column(const std::string& name) const;
  double at(std::size_t row, const std::string& name) const { return rows.at(row).at(column_index(name)); }

  bool operator==(const MetricsTable&) const;
};

/// Two-column series emitted as plot data.
struct Sweep {
  std::string name;
  std::string x_label;
  std::string y_label;
  std::vector<double> x;
  std::vector<double> y;

  bool operator==(const Sweep&) const;
};

struct ExperimentReport {
  std::string kind;
  nlohmann::json config;
  MetricsTable table;
  std::vector<Check> checks;
  std::map<std::string, double> summary;
  std::vector<Sweep> sweeps;
  std::vector<std::string> findings;
  /// Structured per-member output (decompositions, characteristic records).
  nlohmann::json records = nlohmann::json::array();
  bool calibration_failed = false;
  /// Wall-clock seconds; excluded from equality.
  std::map<std::string, double> timings;

  const Check* find_check(const std::string& name) const;
  bool passed(bool strict) const;
  /// Equal up to timings.
  bool operator==(const ExperimentReport& other) const;
};

nlohmann::json to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const nlohmann::json& j);

void write_csv(const MetricsTable& table, std::ostream& out);

struct EmittedFiles {
  std::filesystem::path json;
  std::filesystem::path csv;
  std::vector<std::filesystem::path> plots;
};

/// Writes `<stem>.json`, `<stem>.csv` and `<stem>_<sweep>.dat` into `dir`.
EmittedFiles emit_report(const ExperimentReport& report, const std::filesystem::path& dir, const std::string& stem);
ExperimentReport load_report(const std::filesystem::path& json_file);

/// Doubles with ±inf/nan spelled as strings, so they survive a JSON round trip.
nlohmann::json number_to_json(double v);
double number_from_json(const nlohmann::json& j);

}  // namespace mwsq
