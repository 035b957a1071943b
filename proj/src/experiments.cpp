#include "mwsq/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "mwsq/errors.hpp"
#include "mwsq/haar.hpp"
#include "mwsq/mvee.hpp"
#include "mwsq/norm_search.hpp"
#include "mwsq/norms.hpp"
#include "mwsq/operators.hpp"
#include "mwsq/reference.hpp"

namespace mwsq {

using nlohmann::json;

namespace {

struct Configuration {
  int d, depth, n;
  double p;
};

constexpr Configuration kConfigurations[] = {
    {1, 6, 1, 1.5}, {1, 6, 2, 2.0}, {1, 6, 3, 1.25}, {2, 5, 1, 3.0},
    {2, 5, 2, 1.5}, {2, 4, 3, 2.0}, {2, 6, 2, 3.0}, {2, 6, 3, 1.25},
};
constexpr int kConfigurationCount = static_cast<int>(std::size(kConfigurations));

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> number_list(const json& v, const char* key) {
  if (v.is_number()) return {v.get<double>()};
  if (v.is_array()) return v.get<std::vector<double>>();
  if (v.is_string()) {
    std::vector<double> out;
    std::stringstream ss(v.get<std::string>());
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    return out;
  }
  throw InputError(std::string("config key '") + key + "' must be a number or a list");
}

json cube_json(const DyadicCube& c) { return json::array({c.level, c.morton}); }

/// Runs `body(i)` for every member index in a dynamic work pool, rethrowing the
/// first failure (by index) after the pool drains.
template <class Body>
void for_each_member(int count, Body body) {
  std::vector<std::exception_ptr> errors(count);
#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 0; i < count; ++i) {
    try {
      body(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

Check make_check(std::string name, bool passed, double value, double limit, bool hard = true, json witness = nullptr) {
  return {std::move(name), passed, value, limit, hard, passed ? json(nullptr) : std::move(witness)};
}

}  // namespace

std::array<int, 3> parse_grid(const std::string& text) {
  std::array<int, 3> out{};
  std::stringstream ss(text);
  std::string item;
  int k = 0;
  while (std::getline(ss, item, ',')) {
    if (k == 3) throw InputError("grid must be d,N,n");
    try {
      std::size_t used = 0;
      out[k] = std::stoi(item, &used);
      if (used != item.size()) throw InputError("bad grid entry '" + item + "'");
    } catch (const std::logic_error&) {
      throw InputError("bad grid entry '" + item + "'");
    }
    ++k;
  }
  if (k != 3) throw InputError("grid must be d,N,n");
  GridSpec(out[0], out[1], out[2]);
  return out;
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["grid"] = c.grid ? json(*c.grid) : json(nullptr);
  j["p"] = c.p;
  j["lambda"] = c.lambda;
  j["corona_lambda"] = c.corona_lambda;
  j["max_escalations"] = c.max_escalations;
  j["seed"] = c.seed;
  j["members"] = c.members;
  j["trials"] = c.trials;
  j["strict"] = c.strict;
  j["format"] = c.format;
  j["out"] = c.out;
  j["weight"] = c.weight;
  j["function"] = c.function;
  j["intermittency"] = c.intermittency;
  j["functions"] = c.functions;
  j["log_amplitude"] = c.log_amplitude;
  j["alpha"] = c.alpha;
  j["rotation"] = c.rotation;
  j["sweep"] = c.sweep;
  j["tolerance"] = c.tolerance;
  j["u"] = c.u_file;
  j["v"] = c.v_file;
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw InputError("config must be a JSON object");
  ExperimentConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "grid") {
        if (v.is_null()) c.grid.reset();
        else if (v.is_string()) c.grid = parse_grid(v.get<std::string>());
        else c.grid = v.get<std::array<int, 3>>();
      } else if (key == "p") c.p = number_list(v, "p");
      else if (key == "lambda") c.lambda = v.get<double>();
      else if (key == "corona_lambda") c.corona_lambda = v.get<double>();
      else if (key == "max_escalations") c.max_escalations = v.get<int>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "members") c.members = v.get<int>();
      else if (key == "trials") c.trials = v.get<int>();
      else if (key == "strict") c.strict = v.get<bool>();
      else if (key == "format") c.format = v.get<std::string>();
      else if (key == "out") c.out = v.get<std::string>();
      else if (key == "weight") c.weight = v.get<std::string>();
      else if (key == "function") c.function = v.get<std::string>();
      else if (key == "intermittency") c.intermittency = v.get<double>();
      else if (key == "functions") c.functions = v.get<int>();
      else if (key == "log_amplitude") c.log_amplitude = v.get<double>();
      else if (key == "alpha") c.alpha = number_list(v, "alpha");
      else if (key == "rotation") c.rotation = v.get<double>();
      else if (key == "sweep") c.sweep = number_list(v, "sweep");
      else if (key == "tolerance") c.tolerance = v.get<double>();
      else if (key == "u") c.u_file = v.get<std::string>();
      else if (key == "v") c.v_file = v.get<std::string>();
      else throw InputError("unknown config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("malformed config: ") + e.what());
  }
  if (c.grid) GridSpec((*c.grid)[0], (*c.grid)[1], (*c.grid)[2]);
  for (double p : c.p)
    if (!(p > 1.0) || !std::isfinite(p)) throw InputError("every p must be a finite number > 1");
  if (c.members < 0) throw InputError("members must be nonnegative");
  if (c.trials < 1) throw InputError("trials must be at least 1");
  if (c.format != "json" && c.format != "csv") throw InputError("format must be json or csv");
  if (c.function != "cascade" && c.function != "bumps" && c.function != "constant" && c.function != "zero") {
    throw InputError("function must be cascade, bumps, constant or zero");
  }
  if (!(c.intermittency >= 0.0)) throw InputError("intermittency must be nonnegative");
  if (c.functions < 1) throw InputError("functions must be at least 1");
  if (c.weight != "mixed") parse_weight_family(c.weight);
  StoppingConfig{c.lambda, 2.0, c.max_escalations}.validate();
  StoppingConfig{c.corona_lambda, 2.0, c.max_escalations}.validate();
  if (!(c.tolerance > 0.0)) throw InputError("tolerance must be positive");
  return c;
}

std::vector<EnsembleMember> build_ensemble(const ExperimentConfig& config) {
  std::vector<EnsembleMember> out;
  for (int i = 0; i < config.members; ++i) {
    const int k = i % kConfigurationCount;
    const auto& base = kConfigurations[k];
    EnsembleMember m;
    m.index = i;
    m.configuration = k;
    m.seed = derive_seed(config.seed, static_cast<std::uint64_t>(i));
    m.grid = config.grid ? GridSpec((*config.grid)[0], (*config.grid)[1], (*config.grid)[2])
                         : GridSpec(base.d, base.depth, base.n);
    m.p = config.p.empty() ? base.p : config.p[i % config.p.size()];
    if (config.weight == "mixed") {
      m.weight = (i / kConfigurationCount) % 2 == 1 ? WeightFamily::two_weight_pair : WeightFamily::random_log_bounded;
    } else {
      m.weight = parse_weight_family(config.weight);
    }
    out.push_back(m);
  }
  return out;
}

WeightFamilySpec member_weight_spec(const EnsembleMember& m, const ExperimentConfig& config) {
  WeightFamilySpec spec;
  spec.kind = m.weight;
  spec.grid = m.grid;
  spec.alpha = config.alpha;
  spec.rotation = config.rotation;
  spec.log_amplitude = config.log_amplitude;
  spec.seed = m.seed;
  return spec;
}

WeightPair member_weights(const EnsembleMember& m, const ExperimentConfig& config) {
  return generate_weight_pair(member_weight_spec(m, config));
}

CellField member_function(const EnsembleMember& m, const ExperimentConfig& config, int index) {
  const std::uint64_t seed = derive_seed(m.seed, 101 + static_cast<std::uint64_t>(index));
  if (config.function == "cascade") return generate_cascade(m.grid, seed, config.intermittency);
  if (config.function == "bumps") return generate_function(m.grid, seed);
  CellField f(m.grid, FieldKind::vector);
  if (config.function == "constant") {
    for (std::uint64_t x = 0; x < m.grid.cells(); ++x)
      for (int i = 0; i < m.grid.vector_dim(); ++i) f.cell(x)[i] = 1.0 / (i + 1);
  }
  return f;
}

json member_to_json(const EnsembleMember& m, const ExperimentConfig& config) {
  json j = to_json(config);
  j["member"] = m.index;
  j["configuration"] = m.configuration;
  j["member_seed"] = m.seed;
  j["member_grid"] = {m.grid.dimension(), m.grid.depth(), m.grid.vector_dim()};
  j["member_p"] = m.p;
  j["member_weight"] = to_string(m.weight);
  return j;
}

double theorem_bound(const Characteristics& c) {
  double bound = std::pow(c.ap, 1.0 / c.p) * std::pow(c.apwk_dual, 1.0 / c.p);
  if (c.p > 2.0) bound *= std::pow(c.apwk, 0.5 - 1.0 / c.p);
  return bound;
}

SlopeFit loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  SlopeFit fit;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (x[i] > 0.0 && y[i] > 0.0 && std::isfinite(x[i]) && std::isfinite(y[i])) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  fit.points = static_cast<int>(lx.size());
  if (lx.empty()) return fit;
  const double m = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / m;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / m;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  fit.intercept = my;
  if (sxx <= 1e-24 * m) return fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.ci_low = fit.ci_high = fit.slope;
  if (lx.size() < 3) return fit;
  double rss = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - fit.intercept - fit.slope * lx[i];
    rss += r * r;
  }
  fit.standard_error = std::sqrt(rss / (m - 2.0) / sxx);
  const boost::math::students_t dist(m - 2.0);
  const double t = boost::math::quantile(boost::math::complement(dist, 0.025));
  fit.ci_low = fit.slope - t * fit.standard_error;
  fit.ci_high = fit.slope + t * fit.standard_error;
  return fit;
}

json family_to_json(const SparseFamily& family) {
  json members = json::array();
  for (const auto& m : family.members()) {
    members.push_back({{"cube", cube_json(m.cube)},
                       {"generation", m.generation},
                       {"parent", m.parent ? cube_json(*m.parent) : json(nullptr)}});
  }
  return members;
}

json corona_to_json(const CoronaDecomposition& dec, const CoronaCheck& check) {
  json stopping = json::array();
  for (const auto& m : dec.stopping) {
    stopping.push_back({{"cube", cube_json(m.cube)},
                        {"generation", m.generation},
                        {"parent", m.parent ? cube_json(*m.parent) : json(nullptr)}});
  }
  return {{"lambda", dec.lambda},
          {"stopping", stopping},
          {"margins",
           {{"packing", number_to_json(check.worst_packing)},
            {"control", number_to_json(check.worst_control)},
            {"control_limit", number_to_json(check.control_limit)},
            {"partition_violations", check.partition_violations}}}};
}

json characteristics_to_json(const Characteristics& c) {
  return {{"p", c.p},
          {"ap", number_to_json(c.ap)},
          {"ap_reduced", number_to_json(c.ap_reduced)},
          {"apwk", number_to_json(c.apwk)},
          {"apwk_sampling_interval", {number_to_json(c.apwk_sampled), number_to_json(c.apwk)}},
          {"apwk_dual", number_to_json(c.apwk_dual)},
          {"apwk_dual_sampling_interval", {number_to_json(c.apwk_dual_sampled), number_to_json(c.apwk_dual)}},
          {"directions_used", c.directions_used},
          {"argmax_cube", cube_json(c.ap_argmax)},
          {"ap_reduced_argmax_cube", cube_json(c.ap_reduced_argmax)},
          {"rh_epsilon", number_to_json(c.rh_epsilon)},
          {"rh_epsilon_times_a_infty", number_to_json(c.rh_epsilon_times_a_infty)},
          {"a_infty_flavor", "fujii-wilson-dyadic"}};
}

const std::vector<std::string>& domination_columns() {
  static const std::vector<std::string> columns{
      "member",         "configuration",   "d",
      "N",              "n",               "p",
      "two_weight",     "lambda",          "escalations",
      "functions",      "sparse",          "sparse_ratio",
      "generations",    "family_size",     "domination_max",
      "domination_ratio", "sqrt_lambda",
      "skipped_cells",  "weak_constant",   "packing",
      "inclusion",      "disjoint",        "disjoint_ratio",
      "corona_lambda",  "corona_escalations", "corona_packing",
      "corona_control", "corona_control_limit", "corona_partition_violations",
      "carleson_star",  "carleson_limit",  "reducing_factor"};
  return columns;
}

const std::vector<std::string>& norm_bound_columns() {
  static const std::vector<std::string> columns{
      "member", "configuration", "d",         "N",           "n",         "p",
      "two_weight", "ap",        "ap_reduced", "apwk",       "apwk_sampled", "apwk_dual",
      "apwk_dual_sampled", "rh_epsilon", "rh_epsilon_times_a_infty", "estimate", "bound", "ratio",
      "suite_limit", "skipped_fraction", "directions"};
  return columns;
}

const std::vector<std::string>& sharpness_columns() {
  static const std::vector<std::string> columns{"alpha", "ap", "apwk_dual", "estimate", "bound", "ratio"};
  return columns;
}

const std::vector<std::string>& characteristics_columns() {
  static const std::vector<std::string> columns{
      "p", "ap", "ap_reduced", "apwk", "apwk_sampled", "apwk_dual", "apwk_dual_sampled", "directions",
      "rh_epsilon", "rh_epsilon_times_a_infty", "argmax_level", "argmax_morton"};
  return columns;
}

namespace {

struct DominationOutcome {
  std::vector<double> row;
  json records = json::array();
  std::vector<std::string> findings;
  bool calibration_failed = false;
  std::string error;
  double seconds = 0.0;
};

DominationOutcome run_domination_member(const EnsembleMember& m, const ExperimentConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  DominationOutcome out;
  const int n = m.grid.vector_dim();
  const auto weights = member_weights(m, config);
  const auto reducing = std::make_shared<const ReducingMatrices>(weights.u, m.p, ReducingKind::forward,
                                                                 ReducingOptions{0, config.tolerance});
  const auto& cols = domination_columns();
  std::vector<double> row(cols.size(), kNaN);
  auto at = [&](const char* name) -> double& {
    return row[static_cast<std::size_t>(std::find(cols.begin(), cols.end(), name) - cols.begin())];
  };
  // Worst case over the member's test functions.
  auto raise = [&](const char* name, double v) {
    double& slot = at(name);
    if (std::isnan(slot) || v > slot) slot = v;
  };
  auto lower = [&](const char* name, double v) {
    double& slot = at(name);
    if (std::isnan(slot) || v < slot) slot = v;
  };
  at("member") = m.index;
  at("configuration") = m.configuration;
  at("d") = m.grid.dimension();
  at("N") = m.grid.depth();
  at("n") = n;
  at("p") = m.p;
  at("two_weight") = m.weight == WeightFamily::two_weight_pair;
  at("functions") = config.functions;
  at("reducing_factor") = reducing->worst_upper_factor();
  at("carleson_limit") = 1.5 * reducing_constant(n, config.tolerance);
  double worst_excess = -1.0, worst_control = -1.0;
  for (int r = 0; r < config.functions; ++r) {
    const std::string tag = "member " + std::to_string(m.index) + " function " + std::to_string(r) + ": ";
    const StoppingContext ctx(weights.u, m.p, member_function(m, config, r), reducing);
    try {
      auto sparse = calibrate_lambda([&](double l) { return build_sparse_family(ctx, l); },
                                     [](const SparseFamily& fam) {
                                       const auto c = verify_sparse(fam);
                                       return std::pair{c.sparse, c.worst_ratio};
                                     },
                                     StoppingConfig{config.lambda, 2.0, config.max_escalations});
      for (auto& f : sparse.findings) out.findings.push_back(tag + "sparse " + f);
      const auto& family = sparse.result;
      const auto check = verify_sparse(family);
      const auto dom = verify_pointwise_domination(ctx, family);
      const auto weak = weak_type_step(ctx, family, sparse.lambda);
      const auto sets = disjoint_sets(family);
      const auto a = sparse_family_coefficients(weights.u, m.p, family, ctx.reducing());
      const auto star = carleson_star_norm(a, m.p, 2.0);
      raise("lambda", sparse.lambda);
      raise("escalations", static_cast<double>(sparse.steps.size() - 1));
      lower("sparse", check.sparse);
      raise("sparse_ratio", check.worst_ratio);
      raise("generations", family.generations());
      raise("family_size", static_cast<double>(family.size()));
      raise("domination_max", dom.max_ratio);
      const double excess = dom.max_ratio / std::sqrt(sparse.lambda);
      if (!(excess <= worst_excess)) {
        worst_excess = excess;
        at("domination_ratio") = dom.max_ratio;
        at("sqrt_lambda") = std::sqrt(sparse.lambda);
      }
      raise("skipped_cells", static_cast<double>(dom.skipped));
      raise("weak_constant", weak.constant);
      raise("packing", weak.packing);
      lower("inclusion", weak.inclusion);
      lower("disjoint", sets.disjoint && sets.measure_bound);
      raise("disjoint_ratio", sets.worst_ratio);
      raise("carleson_star", star.value);

      auto corona = calibrate_lambda([&](double l) { return build_corona(ctx, l); },
                                     [&](const CoronaDecomposition& dec) {
                                       const auto c = verify_corona(dec, ctx, config.tolerance);
                                       return std::pair{c.passed(), c.worst_packing};
                                     },
                                     StoppingConfig{config.corona_lambda, 2.0, config.max_escalations});
      for (auto& f : corona.findings) out.findings.push_back(tag + "corona " + f);
      const auto cc = verify_corona(corona.result, ctx, config.tolerance);
      raise("corona_lambda", corona.lambda);
      raise("corona_escalations", static_cast<double>(corona.steps.size() - 1));
      raise("corona_packing", cc.worst_packing);
      const double control = cc.worst_control / cc.control_limit;
      if (!(control <= worst_control)) {
        worst_control = control;
        at("corona_control") = cc.worst_control;
        at("corona_control_limit") = cc.control_limit;
      }
      raise("corona_partition_violations", static_cast<double>(cc.partition_violations));
      out.records.push_back({{"function", r},
                             {"lambda", sparse.lambda},
                             {"family", family_to_json(family)},
                             {"corona", corona_to_json(corona.result, cc)}});
    } catch (const CalibrationError& e) {
      out.calibration_failed = true;
      out.error = tag + e.what();
      at("lambda") = kNaN;
      break;
    }
  }
  out.row = std::move(row);
  out.seconds = seconds_since(t0);
  return out;
}

void add_domination_checks(ExperimentReport& report, const std::vector<EnsembleMember>& ensemble,
                           const ExperimentConfig& config) {
  const auto& t = report.table;
  auto witness = [&](std::size_t i) { return member_to_json(ensemble[i], config); };
  auto worst = [&](const std::string& col, bool maximize = true) {
    std::size_t arg = 0;
    double best = maximize ? -kInf : kInf;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      const double v = t.at(i, col);
      if (std::isnan(v)) continue;
      if (maximize ? v > best : v < best) {
        best = v;
        arg = i;
      }
    }
    return std::pair{best, arg};
  };
  const std::size_t rows = t.rows.size();
  std::size_t failed = 0, first_failed = 0;
  for (std::size_t i = 0; i < rows; ++i) {
    if (std::isnan(t.at(i, "lambda")) && failed++ == 0) first_failed = i;
  }
  report.checks.push_back(make_check("calibration", failed == 0, static_cast<double>(failed), 0.0, true,
                                     rows ? witness(first_failed) : json(nullptr)));
  if (rows == 0 || failed == rows) return;

  auto [sparse_worst, sparse_arg] = worst("sparse_ratio");
  bool all_sparse = true;
  for (std::size_t i = 0; i < rows; ++i) all_sparse = all_sparse && (std::isnan(t.at(i, "sparse")) || t.at(i, "sparse") == 1.0);
  report.checks.push_back(make_check("sparse", all_sparse, sparse_worst, 0.5, true, witness(sparse_arg)));

  double worst_excess = 0.0;
  std::size_t excess_arg = 0;
  bool finite = true;
  for (std::size_t i = 0; i < rows; ++i) {
    const double r = t.at(i, "domination_ratio");
    if (std::isnan(r)) continue;
    if (!std::isfinite(r) || !std::isfinite(t.at(i, "domination_max"))) finite = false;
    const double e = r / t.at(i, "sqrt_lambda");
    if (!(e <= worst_excess)) {
      worst_excess = e;
      excess_arg = i;
    }
  }
  auto [dom_worst, dom_arg] = worst("domination_max");
  report.checks.push_back(make_check("domination_finite", finite, dom_worst, kInf, true, witness(dom_arg)));
  report.checks.push_back(make_check("domination_within_sqrt_lambda", worst_excess <= 1.0 + 1e-9, worst_excess, 1.0,
                                     true, witness(excess_arg)));

  // Per-configuration stability of the measured constant.
  double worst_dev = 0.0;
  std::size_t dev_arg = 0;
  for (int k = 0; k < kConfigurationCount; ++k) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < rows; ++i) {
      if (t.at(i, "configuration") == k && std::isfinite(t.at(i, "domination_max"))) idx.push_back(i);
    }
    if (idx.empty()) continue;
    double mean = 0.0;
    for (auto i : idx) mean += t.at(i, "domination_max");
    mean /= static_cast<double>(idx.size());
    report.summary["domination_mean_cfg" + std::to_string(k)] = mean;
    double mx = 0.0;
    for (auto i : idx) {
      mx = std::max(mx, t.at(i, "domination_max"));
      const double dev = mean > 0.0 ? std::abs(t.at(i, "domination_max") / mean - 1.0) : 0.0;
      if (dev > worst_dev) {
        worst_dev = dev;
        dev_arg = i;
      }
    }
    report.summary["domination_max_cfg" + std::to_string(k)] = mx;
  }
  report.checks.push_back(make_check("domination_stability", worst_dev <= 0.2, worst_dev, 0.2, false, witness(dev_arg)));

  double skipped = 0.0;
  std::size_t skipped_arg = 0;
  for (std::size_t i = 0; i < rows; ++i) {
    const double frac = t.at(i, "skipped_cells") / std::ldexp(1.0, static_cast<int>(t.at(i, "d") * t.at(i, "N")));
    if (frac > skipped) {
      skipped = frac;
      skipped_arg = i;
    }
  }
  report.checks.push_back(make_check("skipped_cells", skipped <= 0.1, skipped, 0.1, true, witness(skipped_arg)));

  bool inclusion = true, disjoint = true, partition = true, control = true;
  std::size_t inc_arg = 0, dis_arg = 0, part_arg = 0, ctrl_arg = 0;
  double control_worst = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    if (t.at(i, "inclusion") == 0.0 && inclusion) { inclusion = false; inc_arg = i; }
    if (t.at(i, "disjoint") == 0.0 && disjoint) { disjoint = false; dis_arg = i; }
    if (t.at(i, "corona_partition_violations") > 0.0 && partition) { partition = false; part_arg = i; }
    const double c = t.at(i, "corona_control") / t.at(i, "corona_control_limit");
    if (c > control_worst || std::isnan(c)) {
      if (!std::isnan(c)) control_worst = c;
      if (!(c <= 1.0)) { control = false; ctrl_arg = i; }
      else if (control) ctrl_arg = i;
    }
  }
  report.checks.push_back(make_check("weak_type_inclusion", inclusion, 0.0, 0.0, true, witness(inc_arg)));
  report.checks.push_back(make_check("disjoint_sets", disjoint, worst("disjoint_ratio").first, 2.0, true, witness(dis_arg)));
  auto [pack_worst, pack_arg] = worst("corona_packing");
  report.checks.push_back(make_check("corona_packing", pack_worst <= 0.25, pack_worst, 0.25, true, witness(pack_arg)));
  report.checks.push_back(make_check("corona_control", control, control_worst, 1.0, true, witness(ctrl_arg)));
  report.checks.push_back(make_check("corona_partition", partition, 0.0, 0.0, true, witness(part_arg)));

  double star_worst = 0.0;
  std::size_t star_arg = 0;
  for (std::size_t i = 0; i < rows; ++i) {
    const double s = t.at(i, "carleson_star") / t.at(i, "carleson_limit");
    if (s > star_worst) {
      star_worst = s;
      star_arg = i;
    }
  }
  report.checks.push_back(make_check("carleson_star", star_worst <= 1.0, star_worst, 1.0, true, witness(star_arg)));

  report.summary["domination_max"] = dom_worst;
  report.summary["weak_constant_max"] = worst("weak_constant").first;
  report.summary["lambda_max"] = worst("lambda").first;
  report.summary["corona_lambda_max"] = worst("corona_lambda").first;
  report.summary["carleson_star_max"] = worst("carleson_star").first;
}

}  // namespace

ExperimentReport run_domination_experiment(const ExperimentConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto ensemble = build_ensemble(config);
  std::vector<DominationOutcome> outcomes(ensemble.size());
  for_each_member(static_cast<int>(ensemble.size()),
                  [&](int i) { outcomes[i] = run_domination_member(ensemble[i], config); });
  ExperimentReport report;
  report.kind = "dominate";
  report.config = to_json(config);
  report.table.columns = domination_columns();
  report.records = json::array();
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    auto& o = outcomes[i];
    report.table.rows.push_back(o.row);
    report.records.push_back({{"member", i}, {"functions", o.records}});
    for (auto& f : o.findings) report.findings.push_back(f);
    if (o.calibration_failed) {
      report.calibration_failed = true;
      report.findings.push_back(o.error);
    }
    report.timings["member_" + std::to_string(i)] = o.seconds;
  }
  add_domination_checks(report, ensemble, config);
  report.timings["total"] = seconds_since(t0);
  return report;
}

ExperimentReport run_norm_bound_experiment(const ExperimentConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig base = config;
  base.p.clear();
  auto ensemble = build_ensemble(base);
  const std::vector<double> exponents = config.p.empty() ? kExperimentExponents : config.p;
  struct Job {
    std::size_t member;
    double p;
  };
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < ensemble.size(); ++i)
    for (double p : exponents) jobs.push_back({i, p});
  std::vector<std::vector<double>> rows(jobs.size());
  std::vector<double> seconds(jobs.size());
  for_each_member(static_cast<int>(jobs.size()), [&](int k) {
    const auto tj = std::chrono::steady_clock::now();
    const auto& m = ensemble[jobs[k].member];
    const double p = jobs[k].p;
    const int n = m.grid.vector_dim();
    const auto w = member_weights(m, config);
    const auto chars = compute_characteristics(w.u, w.v, p, ReducingOptions{0, config.tolerance});
    const double bound = theorem_bound(chars);
    NormSearchOptions opts;
    opts.trials = config.trials;
    opts.seed = derive_seed(m.seed, static_cast<std::uint64_t>(std::llround(p * 1000.0)));
    opts.dictionary.push_back(member_function(m, config));
    const auto search = operator_norm_lower_bound(
        [&](const CellField& f) { return square_function(w.u, p, f); }, p, w.v, opts);
    rows[k] = {static_cast<double>(m.index), static_cast<double>(m.configuration),
               static_cast<double>(m.grid.dimension()), static_cast<double>(m.grid.depth()),
               static_cast<double>(n), p, m.weight == WeightFamily::two_weight_pair ? 1.0 : 0.0,
               chars.ap, chars.ap_reduced, chars.apwk, chars.apwk_sampled, chars.apwk_dual, chars.apwk_dual_sampled,
               chars.rh_epsilon, chars.rh_epsilon_times_a_infty, search.lower_bound, bound,
               search.lower_bound / bound, suite_constant(n, config.tolerance),
               static_cast<double>(search.skipped) / static_cast<double>(search.evaluations),
               static_cast<double>(chars.directions_used)};
    seconds[k] = seconds_since(tj);
  });

  ExperimentReport report;
  report.kind = "norm-bound";
  report.config = to_json(config);
  report.table.columns = norm_bound_columns();
  report.table.rows = rows;
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    report.timings["member_" + std::to_string(jobs[k].member) + "_p" + std::to_string(jobs[k].p)] = seconds[k];
  }
  const auto& t = report.table;
  double worst = 0.0, worst_skip = 0.0, ratio_lo = kInf, ratio_hi = 0.0, wk_over_ap = 0.0;
  std::size_t arg = 0, skip_arg = 0;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const double r = t.at(k, "ratio") / t.at(k, "suite_limit");
    if (!(r <= worst)) {
      worst = r;
      arg = k;
    }
    if (t.at(k, "skipped_fraction") > worst_skip) {
      worst_skip = t.at(k, "skipped_fraction");
      skip_arg = k;
    }
    const double eq = t.at(k, "ap_reduced") / t.at(k, "ap");
    ratio_lo = std::min(ratio_lo, eq);
    ratio_hi = std::max(ratio_hi, eq);
    wk_over_ap = std::max(wk_over_ap, t.at(k, "apwk") / t.at(k, "ap"));
  }
  auto witness = [&](std::size_t k) {
    json j = member_to_json(ensemble[jobs[k].member], config);
    j["member_p"] = jobs[k].p;
    return j;
  };
  if (!rows.empty()) {
    report.checks.push_back(make_check("norm_bound", worst <= 1.0, worst, 1.0, true, witness(arg)));
    report.checks.push_back(make_check("skipped_candidates", worst_skip <= 0.1, worst_skip, 0.1, true, witness(skip_arg)));
    report.summary["ap_reduced_over_ap_min"] = ratio_lo;
    report.summary["ap_reduced_over_ap_max"] = ratio_hi;
    report.summary["apwk_over_ap_max"] = wk_over_ap;
    report.summary["ratio_over_suite_limit_max"] = worst;
  }
  Sweep sweep{"estimate_vs_bound", "bound", "estimate", t.column("bound"), t.column("estimate")};
  if (!rows.empty()) report.sweeps.push_back(std::move(sweep));
  report.timings["total"] = seconds_since(t0);
  return report;
}

ExperimentReport run_sharpness_scan(const ExperimentConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto g = config.grid.value_or(std::array<int, 3>{1, 6, 1});
  const double p = config.p.empty() ? 2.0 : config.p.front();
  const std::vector<double> sweep =
      config.sweep.empty() ? std::vector<double>{0.0, 0.15, 0.3, 0.45, 0.6, 0.75} : config.sweep;
  WeightFamilySpec spec;
  spec.kind = config.weight == "mixed" ? WeightFamily::scalar_power : parse_weight_family(config.weight);
  spec.grid = GridSpec(g[0], g[1], g[2]);
  spec.rotation = config.rotation;
  spec.log_amplitude = config.log_amplitude;
  spec.seed = config.seed;
  std::vector<std::vector<double>> rows(sweep.size());
  for_each_member(static_cast<int>(sweep.size()), [&](int k) {
    WeightFamilySpec s = spec;
    s.alpha = {sweep[k]};
    const auto w = generate_weight_pair(s);
    const auto chars = compute_characteristics(w.u, w.v, p, ReducingOptions{0, config.tolerance});
    NormSearchOptions opts;
    opts.trials = config.trials;
    opts.seed = derive_seed(config.seed, static_cast<std::uint64_t>(k));
    const auto search = operator_norm_lower_bound(
        [&](const CellField& f) { return square_function(w.u, p, f); }, p, w.v, opts);
    const double bound = theorem_bound(chars);
    rows[k] = {sweep[k], chars.ap, chars.apwk_dual, search.lower_bound, bound, search.lower_bound / bound};
  });
  ExperimentReport report;
  report.kind = "sharpness";
  report.config = to_json(config);
  report.table.columns = sharpness_columns();
  report.table.rows = rows;
  const auto& t = report.table;
  const auto fit = loglog_slope(t.column("ap"), t.column("estimate"));
  report.summary["exploratory"] = 1.0;
  report.summary["p"] = p;
  report.summary["slope"] = fit.slope;
  report.summary["slope_standard_error"] = fit.standard_error;
  report.summary["slope_ci_low"] = fit.ci_low;
  report.summary["slope_ci_high"] = fit.ci_high;
  report.summary["points"] = fit.points;
  double worst = 0.0;
  for (std::size_t k = 0; k < rows.size(); ++k) worst = std::max(worst, t.at(k, "ratio"));
  const double limit = suite_constant(g[2], config.tolerance);
  report.checks.push_back(make_check("ratio_bounded", worst <= limit, worst, limit, false, to_json(config)));
  report.sweeps.push_back({"estimate_vs_ap", "ap", "estimate", t.column("ap"), t.column("estimate")});
  report.sweeps.push_back({"ratio_vs_alpha", "alpha", "ratio", t.column("alpha"), t.column("ratio")});
  report.timings["total"] = seconds_since(t0);
  return report;
}

ExperimentReport run_characteristics(const MatrixWeightField& u, const MatrixWeightField& v,
                                     const ExperimentConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<double> exponents = config.p.empty() ? std::vector<double>{2.0} : config.p;
  ExperimentReport report;
  report.kind = "characteristics";
  report.config = to_json(config);
  report.table.columns = characteristics_columns();
  report.records = json::array();
  for (double p : exponents) {
    const auto c = compute_characteristics(u, v, p, ReducingOptions{0, config.tolerance});
    report.table.rows.push_back({p, c.ap, c.ap_reduced, c.apwk, c.apwk_sampled, c.apwk_dual, c.apwk_dual_sampled,
                                 static_cast<double>(c.directions_used), c.rh_epsilon, c.rh_epsilon_times_a_infty,
                                 static_cast<double>(c.ap_argmax.level), static_cast<double>(c.ap_argmax.morton)});
    report.records.push_back(characteristics_to_json(c));
  }
  report.timings["total"] = seconds_since(t0);
  return report;
}

namespace {

double relative_gap(const CellField& a, const CellField& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < a.values().size(); ++k) {
    num = std::max(num, std::abs(a.values()[k] - b.values()[k]));
    den = std::max(den, std::abs(b.values()[k]));
  }
  return den > 0.0 ? num / den : num;
}

double relative_gap(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

CellField random_field(const GridSpec& g, FieldKind kind, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  CellField f(g, kind);
  for (double& v : f.values()) v = normal(rng);
  return f;
}

CellField random_positive(const GridSpec& g, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  CellField f(g, FieldKind::scalar);
  for (double& v : f.values()) v = std::exp(normal(rng));
  return f;
}

}  // namespace

ExperimentReport run_verify_suite(const ExperimentConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentReport report;
  report.kind = "verify";
  report.config = to_json(config);
  std::mt19937_64 rng(config.seed);
  const json witness = to_json(config);

  // Haar: reconstruction, Parseval and mean zero on small grids.
  double haar_gap = 0.0;
  for (int d = 1; d <= 2; ++d) {
    for (int depth = 1; depth <= 4; ++depth) {
      const GridSpec g(d, depth, 1);
      const auto f = random_field(g, FieldKind::scalar, rng);
      const auto c = haar_transform(f);
      haar_gap = std::max(haar_gap, relative_gap(haar_reconstruct(c, FieldKind::scalar), f));
      double energy = c.top_average()[0] * c.top_average()[0];
      for (std::uint64_t id = 0; id < c.haar_cubes(); ++id)
        for (int s = 1; s < g.children_per_cube(); ++s) energy += c.at(id, s)[0] * c.at(id, s)[0];
      haar_gap = std::max(haar_gap, relative_gap(energy, std::pow(lp_norm(f, 2.0), 2.0)));
      const auto ref = reference::haar_transform(f);
      for (std::uint64_t id = 0; id < c.haar_cubes(); ++id)
        for (int s = 1; s < g.children_per_cube(); ++s)
          haar_gap = std::max(haar_gap, std::abs(c.at(id, s)[0] - ref.at(id, s)[0]));
    }
  }
  report.checks.push_back(make_check("haar_identities", haar_gap <= 1e-10, haar_gap, 1e-10, true, witness));

  // Scalar reduction ‖S_{u,p} f‖_p = ‖S_d f‖_{L^p(u)}.
  double scalar_gap = 0.0;
  for (int k = 0; k < 12; ++k) {
    const GridSpec g(1 + k % 2, 3 + k % 3, 1);
    const double p = std::array{1.5, 2.0, 3.0}[k % 3];
    const auto u = MatrixWeightField::from_scalar(random_positive(g, rng));
    const auto f = random_field(g, FieldKind::vector, rng);
    const double lhs = lp_norm(square_function(u, p, f), p);
    const auto sd = dyadic_square_function(f);
    double s = 0.0;
    for (std::uint64_t x = 0; x < g.cells(); ++x) s += std::pow(sd.cell(x)[0], p) * u.base().cell(x)[0];
    scalar_gap = std::max(scalar_gap, relative_gap(lhs, std::pow(s * g.cell_measure(), 1.0 / p)));
  }
  report.checks.push_back(make_check("scalar_reduction", scalar_gap <= 1e-10, scalar_gap, 1e-10, true, witness));

  // Reducing-matrix two-sided guarantee on sampled directions.
  double reducing_worst = 0.0;
  bool reducing_ok = true;
  for (int k = 0; k < 12; ++k) {
    const int n = 1 + k % 3;
    WeightFamilySpec spec;
    spec.grid = GridSpec(1 + k % 2, 3, n);
    spec.seed = derive_seed(config.seed, 500 + k);
    const auto w = generate_weight(spec);
    const double p = std::array{1.25, 1.5, 3.0}[k % 3];
    const DyadicCube cube{k % 2, 0};
    ReducingOptions opts{0, config.tolerance};
    opts.force_mvee = true;
    const auto fit = fit_reducing_matrix(w, cube, p, ReducingKind::forward, opts);
    const auto dirs = sphere_directions(n, default_direction_count(n));
    const auto ratio = reducing_ratio(w, cube, p, ReducingKind::forward, fit.matrix, dirs);
    reducing_ok = reducing_ok && ratio.min_ratio >= 1.0 - 1e-9 && ratio.max_ratio <= std::sqrt(n) * (1.0 + 1e-3);
    reducing_worst = std::max(reducing_worst, ratio.max_ratio / std::sqrt(n));
  }
  report.checks.push_back(make_check("reducing_guarantee", reducing_ok, reducing_worst, 1.0 + 1e-3, true, witness));

  // Brute-force agreement on grids with at most 64 cells.
  double brute = 0.0;
  int brute_stop_mismatch = 0;
  for (int k = 0; k < 8; ++k) {
    const int d = 1 + k % 2;
    const int depth = d == 1 ? 2 + k % 5 : 1 + k % 3;
    const int n = 1 + k % 3;
    const double p = std::array{1.5, 2.0, 3.0}[k % 3];
    WeightFamilySpec spec;
    spec.grid = GridSpec(d, depth, n);
    spec.seed = derive_seed(config.seed, 900 + k);
    const auto u = generate_weight(spec);
    const auto f = generate_function(spec.grid, derive_seed(config.seed, 950 + k));
    brute = std::max(brute, relative_gap(square_function(u, p, f), reference::square_function(u, p, f)));
    brute = std::max(brute, relative_gap(ap_characteristic(u, u, p).value, reference::ap_characteristic(u, u, p)));
    const StoppingContext ctx(u, p, f, ReducingOptions{0, config.tolerance});
    const auto family = build_sparse_family(ctx, config.lambda);
    for (double r : {1.0, 2.0}) {
      brute = std::max(brute, relative_gap(generalized_sparse_operator(u, p, r, family, f, ctx.reducing()),
                                           reference::sparse_operator(u, p, r, family, f, ctx.reducing())));
    }
    const auto a = sparse_family_coefficients(u, p, family, ctx.reducing());
    brute = std::max(brute, relative_gap(carleson_star_norm(a, p, 2.0).value, reference::carleson_star_norm(a, p, 2.0)));
    for (std::uint64_t id = 0; id < spec.grid.total_cubes(); ++id) {
      const DyadicCube j = cube_from_id(spec.grid, id);
      auto fast = stopping_children_sq(ctx, j, config.lambda);
      auto slow = reference::stopping_children_sq(ctx, j, config.lambda);
      std::sort(fast.begin(), fast.end());
      std::sort(slow.begin(), slow.end());
      brute_stop_mismatch += fast != slow;
      fast = corona_children(ctx, j, config.corona_lambda);
      slow = reference::corona_children(ctx, j, config.corona_lambda);
      std::sort(fast.begin(), fast.end());
      std::sort(slow.begin(), slow.end());
      brute_stop_mismatch += fast != slow;
    }
  }
  report.checks.push_back(make_check("brute_force_kernels", brute <= 1e-12, brute, 1e-12, true, witness));
  report.checks.push_back(make_check("brute_force_stopping", brute_stop_mismatch == 0,
                                     static_cast<double>(brute_stop_mismatch), 0.0, true, witness));

  // Scalar Carleson-sequence lemma with the suite constant 8.
  double carleson_worst = 0.0;
  for (int k = 0; k < 24; ++k) {
    const GridSpec g(1 + k % 2, 3 + k % 3, 1);
    const double q = 1.0 + std::array{0.1, 0.25, 0.5}[k % 3];
    std::vector<double> tau(g.total_cubes());
    std::uniform_real_distribution<double> unit;
    for (std::uint64_t id = 0; id < tau.size(); ++id) {
      tau[id] = unit(rng) < 0.3 ? unit(rng) * measure(cube_from_id(g, id), g.dimension()) : 0.0;
    }
    const auto f = random_positive(g, rng);
    carleson_worst = std::max(carleson_worst, scalar_carleson_embedding_check(g, tau, f, q).constant);
  }
  report.checks.push_back(make_check("carleson_lemma", carleson_worst <= 8.0, carleson_worst, 8.0, true, witness));

  // End-to-end stopping-time run on the configured ensemble.
  const auto dom = run_domination_experiment(config);
  for (const auto& c : dom.checks) report.checks.push_back(c);
  for (const auto& f : dom.findings) report.findings.push_back(f);
  report.calibration_failed = dom.calibration_failed;
  report.table = dom.table;
  report.summary = dom.summary;
  report.timings["total"] = seconds_since(t0);
  return report;
}

}  // namespace mwsq
