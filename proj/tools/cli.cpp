#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mwsq/errors.hpp"
#include "mwsq/experiments.hpp"
#include "mwsq/generators.hpp"

namespace mwsq::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Flags {
  std::string config_file;
  std::string grid;
  std::vector<double> p;
  double lambda = 0.0;
  double corona_lambda = 0.0;
  int max_escalations = 0;
  std::uint64_t seed = 0;
  int members = 0;
  int trials = 0;
  bool strict = false;
  std::string format;
  std::string out;
  std::string weight;
  std::string function;
  double intermittency = 0.0;
  int functions = 0;
  double log_amplitude = 0.0;
  std::vector<double> alpha;
  double rotation = 0.0;
  std::vector<double> sweep;
  double tolerance = 0.0;
  std::string u_file;
  std::string v_file;
  std::string stem;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config_file, "JSON config file; flags override its values");
  sub->add_option("--grid", f.grid, "grid as d,N,n");
  sub->add_option("--p", f.p, "exponent(s) p > 1")->delimiter(',');
  sub->add_option("--seed", f.seed, "master seed");
  sub->add_option("--out", f.out, "output directory");
  sub->add_option("--format", f.format, "stdout format: json or csv");
  sub->add_flag("--strict", f.strict, "fail on soft checks and findings too");
  sub->add_option("--tolerance", f.tolerance, "reducing-matrix tolerance");
  sub->add_option("--weight", f.weight, "weight family (or 'mixed')");
  sub->add_option("--log-amplitude", f.log_amplitude, "log-field amplitude");
  sub->add_option("--alpha", f.alpha, "power exponent(s)")->delimiter(',');
  sub->add_option("--rotation", f.rotation, "rotation speed");
  sub->add_option("--stem", f.stem, "output file stem");
}

void add_ensemble(CLI::App* sub, Flags& f) {
  sub->add_option("--lambda", f.lambda, "initial sparse stopping parameter");
  sub->add_option("--corona-lambda", f.corona_lambda, "initial corona stopping parameter");
  sub->add_option("--max-escalations", f.max_escalations, "escalation cap");
  sub->add_option("--members", f.members, "ensemble size");
  sub->add_option("--trials", f.trials, "norm-search trials");
  sub->add_option("--function", f.function, "test function: cascade, bumps, constant or zero");
  sub->add_option("--intermittency", f.intermittency, "cascade multiplier spread");
  sub->add_option("--functions", f.functions, "test functions per member");
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError("config file '" + path + "': " + e.what());
  }
}

ExperimentConfig resolve(const CLI::App& sub, const Flags& f) {
  json j = f.config_file.empty() ? json::object() : read_json_file(f.config_file);
  auto given = [&](const char* name) { return sub.get_option_no_throw(name) && sub.count(name) > 0; };
  if (given("--grid")) j["grid"] = f.grid;
  if (given("--p")) j["p"] = f.p;
  if (given("--lambda")) j["lambda"] = f.lambda;
  if (given("--corona-lambda")) j["corona_lambda"] = f.corona_lambda;
  if (given("--max-escalations")) j["max_escalations"] = f.max_escalations;
  if (given("--seed")) j["seed"] = f.seed;
  if (given("--members")) j["members"] = f.members;
  if (given("--trials")) j["trials"] = f.trials;
  if (given("--strict")) j["strict"] = f.strict;
  if (given("--format")) j["format"] = f.format;
  if (given("--out")) j["out"] = f.out;
  if (given("--weight")) j["weight"] = f.weight;
  if (given("--function")) j["function"] = f.function;
  if (given("--intermittency")) j["intermittency"] = f.intermittency;
  if (given("--functions")) j["functions"] = f.functions;
  if (given("--log-amplitude")) j["log_amplitude"] = f.log_amplitude;
  if (given("--alpha")) j["alpha"] = f.alpha;
  if (given("--rotation")) j["rotation"] = f.rotation;
  if (given("--sweep")) j["sweep"] = f.sweep;
  if (given("--tolerance")) j["tolerance"] = f.tolerance;
  if (given("--u")) j["u"] = f.u_file;
  if (given("--v")) j["v"] = f.v_file;
  return config_from_json(j);
}

int finish(const ExperimentReport& report, const ExperimentConfig& config, const std::string& stem, std::ostream& out,
           std::ostream& err) {
  if (!config.out.empty()) {
    const auto files = emit_report(report, config.out, stem.empty() ? report.kind : stem);
    err << "wrote " << files.json.string() << " and " << files.csv.string() << "\n";
  }
  if (config.format == "csv") {
    write_csv(report.table, out);
  } else {
    out << to_json(report).dump(2) << "\n";
  }
  for (const auto& c : report.checks) {
    err << (c.passed ? "PASS " : (c.hard ? "FAIL " : "WARN ")) << c.name << " value=" << c.value
        << " limit=" << c.limit << "\n";
  }
  for (const auto& f : report.findings) err << "finding: " << f << "\n";
  if (report.calibration_failed) return kCalibrationFailure;
  return report.passed(config.strict) ? kPass : kVerifierFailure;
}

WeightFamilySpec weight_spec(const ExperimentConfig& c) {
  WeightFamilySpec spec;
  spec.kind = c.weight == "mixed" ? WeightFamily::random_log_bounded : parse_weight_family(c.weight);
  const auto g = c.grid.value_or(std::array<int, 3>{1, 4, 1});
  spec.grid = GridSpec(g[0], g[1], g[2]);
  spec.alpha = c.alpha;
  spec.rotation = c.rotation;
  spec.log_amplitude = c.log_amplitude;
  spec.seed = c.seed;
  return spec;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Matrix-weighted dyadic square function experiments"};
  app.require_subcommand(1);
  Flags f;

  auto* gen = app.add_subcommand("gen-weight", "generate a weight field (or pair) and write it to --out");
  add_common(gen, f);
  auto* chars = app.add_subcommand("characteristics", "A_p-type characteristics of a weight pair");
  add_common(chars, f);
  chars->add_option("--u", f.u_file, "field file for U");
  chars->add_option("--v", f.v_file, "field file for V (defaults to U)");
  auto* dom = app.add_subcommand("dominate", "stopping-time families, sparse domination and corona checks");
  add_common(dom, f);
  add_ensemble(dom, f);
  auto* norm = app.add_subcommand("norm-bound", "operator-norm estimates against the weighted bound");
  add_common(norm, f);
  add_ensemble(norm, f);
  auto* sharp = app.add_subcommand("sharpness", "exploratory scan of estimate versus characteristic");
  add_common(sharp, f);
  add_ensemble(sharp, f);
  sharp->add_option("--sweep", f.sweep, "alpha values")->delimiter(',');
  auto* verify = app.add_subcommand("verify", "full invariant suite");
  add_common(verify, f);
  add_ensemble(verify, f);

  std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kPass;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kPass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    const ExperimentConfig config = resolve(*sub, f);
    if (sub == gen) {
      const auto spec = weight_spec(config);
      const fs::path dir = config.out.empty() ? fs::path(".") : fs::path(config.out);
      fs::create_directories(dir);
      const std::string stem = f.stem.empty() ? "weight" : f.stem;
      if (spec.kind == WeightFamily::two_weight_pair) {
        const auto pair = generate_weight_pair(spec);
        write_field_text(pair.u.base(), dir / (stem + "_u.txt"));
        write_field_text(pair.v.base(), dir / (stem + "_v.txt"));
        out << (dir / (stem + "_u.txt")).string() << "\n" << (dir / (stem + "_v.txt")).string() << "\n";
      } else {
        const auto w = generate_weight(spec);
        write_field_text(w.base(), dir / (stem + ".txt"));
        out << (dir / (stem + ".txt")).string() << "\n";
      }
      return kPass;
    }
    if (sub == chars) {
      ExperimentReport report;
      if (!config.u_file.empty()) {
        const MatrixWeightField u(read_field(config.u_file));
        const MatrixWeightField v(read_field(config.v_file.empty() ? config.u_file : config.v_file));
        report = run_characteristics(u, v, config);
      } else {
        const auto pair = generate_weight_pair(weight_spec(config));
        report = run_characteristics(pair.u, pair.v, config);
      }
      return finish(report, config, f.stem, out, err);
    }
    if (sub == dom) return finish(run_domination_experiment(config), config, f.stem, out, err);
    if (sub == norm) return finish(run_norm_bound_experiment(config), config, f.stem, out, err);
    if (sub == sharp) return finish(run_sharpness_scan(config), config, f.stem, out, err);
    return finish(run_verify_suite(config), config, f.stem, out, err);
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const DomainError& e) {
    err << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const DefinitenessError& e) {
    err << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const CalibrationError& e) {
    err << "calibration failure: " << e.what() << "\n";
    return kCalibrationFailure;
  } catch (const std::exception& e) {
    err << "verifier failure: " << e.what() << "\n";
    return kVerifierFailure;
  }
}

}  // namespace mwsq::cli
