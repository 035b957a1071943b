#include "mwsq/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "mwsq/errors.hpp"

namespace mwsq {

using nlohmann::json;

namespace {

bool same_number(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

bool same_numbers(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), same_number);
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json numbers_to_json(const std::vector<double>& values) {
  json out = json::array();
  for (double v : values) out.push_back(number_to_json(v));
  return out;
}

std::vector<double> numbers_from_json(const json& j) {
  std::vector<double> out;
  for (const auto& v : j) out.push_back(number_from_json(v));
  return out;
}

}  // namespace

json number_to_json(double v) {
  if (std::isfinite(v)) return v;
  return format_number(v);
}

double number_from_json(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw InputError("expected a number in report JSON");
}

std::size_t MetricsTable::column_index(const std::string& name) const {
  auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw InputError("no column named '" + name + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

std::vector<double> MetricsTable::column(const std::string& name) const {
  const auto k = column_index(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.at(k));
  return out;
}

bool MetricsTable::operator==(const MetricsTable& other) const {
  if (columns != other.columns || rows.size() != other.rows.size()) return false;
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (!same_numbers(rows[i], other.rows[i])) return false;
  return true;
}

bool Sweep::operator==(const Sweep& other) const {
  return name == other.name && x_label == other.x_label && y_label == other.y_label && same_numbers(x, other.x) &&
         same_numbers(y, other.y);
}

const Check* ExperimentReport::find_check(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

bool ExperimentReport::passed(bool strict) const {
  if (calibration_failed) return false;
  for (const auto& c : checks)
    if (!c.passed && (c.hard || strict)) return false;
  return !strict || findings.empty();
}

bool ExperimentReport::operator==(const ExperimentReport& other) const {
  if (summary.size() != other.summary.size()) return false;
  for (const auto& [k, v] : summary) {
    auto it = other.summary.find(k);
    if (it == other.summary.end() || !same_number(v, it->second)) return false;
  }
  if (checks.size() != other.checks.size()) return false;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const auto& a = checks[i];
    const auto& b = other.checks[i];
    if (a.name != b.name || a.passed != b.passed || !same_number(a.value, b.value) ||
        !same_number(a.limit, b.limit) || a.hard != b.hard || a.witness != b.witness)
      return false;
  }
  return kind == other.kind && config == other.config && table == other.table && sweeps == other.sweeps &&
         findings == other.findings && records == other.records && calibration_failed == other.calibration_failed;
}

json to_json(const ExperimentReport& report) {
  json j;
  j["kind"] = report.kind;
  j["config"] = report.config;
  j["table"]["columns"] = report.table.columns;
  j["table"]["rows"] = json::array();
  for (const auto& r : report.table.rows) j["table"]["rows"].push_back(numbers_to_json(r));
  j["checks"] = json::array();
  for (const auto& c : report.checks) {
    j["checks"].push_back({{"name", c.name},
                           {"passed", c.passed},
                           {"value", number_to_json(c.value)},
                           {"limit", number_to_json(c.limit)},
                           {"hard", c.hard},
                           {"witness", c.witness}});
  }
  j["summary"] = json::object();
  for (const auto& [k, v] : report.summary) j["summary"][k] = number_to_json(v);
  j["sweeps"] = json::array();
  for (const auto& s : report.sweeps) {
    j["sweeps"].push_back({{"name", s.name},
                           {"x_label", s.x_label},
                           {"y_label", s.y_label},
                           {"x", numbers_to_json(s.x)},
                           {"y", numbers_to_json(s.y)}});
  }
  j["findings"] = report.findings;
  j["records"] = report.records;
  j["calibration_failed"] = report.calibration_failed;
  j["timings"] = json::object();
  for (const auto& [k, v] : report.timings) j["timings"][k] = v;
  return j;
}

ExperimentReport report_from_json(const json& j) {
  try {
    ExperimentReport r;
    r.kind = j.at("kind").get<std::string>();
    r.config = j.at("config");
    r.table.columns = j.at("table").at("columns").get<std::vector<std::string>>();
    for (const auto& row : j.at("table").at("rows")) r.table.rows.push_back(numbers_from_json(row));
    for (const auto& c : j.at("checks")) {
      r.checks.push_back({c.at("name").get<std::string>(), c.at("passed").get<bool>(),
                          number_from_json(c.at("value")), number_from_json(c.at("limit")), c.at("hard").get<bool>(),
                          c.at("witness")});
    }
    for (const auto& [k, v] : j.at("summary").items()) r.summary[k] = number_from_json(v);
    for (const auto& s : j.at("sweeps")) {
      r.sweeps.push_back({s.at("name").get<std::string>(), s.at("x_label").get<std::string>(),
                          s.at("y_label").get<std::string>(), numbers_from_json(s.at("x")),
                          numbers_from_json(s.at("y"))});
    }
    r.findings = j.at("findings").get<std::vector<std::string>>();
    r.records = j.at("records");
    r.calibration_failed = j.at("calibration_failed").get<bool>();
    for (const auto& [k, v] : j.at("timings").items()) r.timings[k] = v.get<double>();
    return r;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed report JSON: ") + e.what());
  }
}

void write_csv(const MetricsTable& table, std::ostream& out) {
  for (std::size_t k = 0; k < table.columns.size(); ++k) out << (k ? "," : "") << table.columns[k];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << format_number(row[k]);
    out << '\n';
  }
}

EmittedFiles emit_report(const ExperimentReport& report, const std::filesystem::path& dir, const std::string& stem) {
  std::filesystem::create_directories(dir);
  EmittedFiles files{dir / (stem + ".json"), dir / (stem + ".csv"), {}};
  {
    std::ofstream out(files.json);
    if (!out) throw InputError("cannot write " + files.json.string());
    out << to_json(report).dump(2) << '\n';
  }
  {
    std::ofstream out(files.csv);
    if (!out) throw InputError("cannot write " + files.csv.string());
    write_csv(report.table, out);
  }
  for (const auto& s : report.sweeps) {
    auto path = dir / (stem + "_" + s.name + ".dat");
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path.string());
    out << "# " << s.x_label << ' ' << s.y_label << '\n';
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      out << format_number(s.x[i]) << ' ' << format_number(s.y[i]) << '\n';
    }
    files.plots.push_back(std::move(path));
  }
  return files;
}

ExperimentReport load_report(const std::filesystem::path& json_file) {
  std::ifstream in(json_file);
  if (!in) throw InputError("cannot open " + json_file.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed report JSON: ") + e.what());
  }
  return report_from_json(j);
}

}  // namespace mwsq
