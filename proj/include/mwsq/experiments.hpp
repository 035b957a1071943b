#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mwsq/characteristics.hpp"
#include "mwsq/corona.hpp"
#include "mwsq/family.hpp"
#include "mwsq/generators.hpp"
#include "mwsq/report.hpp"
#include "mwsq/stopping.hpp"

namespace mwsq {

/// Every knob of an experiment run. Mirrors the command-line flags; the JSON
/// form is both the config-file format and the echo embedded in reports.
struct ExperimentConfig {
  /// d, N, n; unset means the built-in ensemble grids.
  std::optional<std::array<int, 3>> grid;
  /// Exponents; empty means the experiment's default.
  std::vector<double> p;
  double lambda = kDefaultSparseLambda;
  double corona_lambda = kDefaultCoronaLambda;
  int max_escalations = 20;
  std::uint64_t seed = 1;
  int members = 32;
  int trials = 8;
  bool strict = false;
  std::string format = "json";
  std::string out;
  /// "mixed" alternates random-log-bounded and two-weight-pair members;
  /// otherwise a weight family name.
  std::string weight = "mixed";
  /// "cascade", "bumps", "constant" or "zero".
  std::string function = "cascade";
  /// Cascade multiplier spread σ.
  double intermittency = 1.0;
  /// Test functions per ensemble member; member constants are maxima over them.
  int functions = 4;
  double log_amplitude = 1.0;
  std::vector<double> alpha{0.5};
  double rotation = 0.0;
  /// Sharpness sweep values of α.
  std::vector<double> sweep;
  double tolerance = 1e-6;
  /// Optional field files for `characteristics`.
  std::string u_file;
  std::string v_file;

  bool operator==(const ExperimentConfig&) const = default;
};

nlohmann::json to_json(const ExperimentConfig& config);
/// Unknown keys and malformed values are input errors.
ExperimentConfig config_from_json(const nlohmann::json& j);
/// Parses "d,N,n".
std::array<int, 3> parse_grid(const std::string& text);

inline const std::vector<double> kExperimentExponents{1.25, 1.5, 2.0, 3.0};

struct EnsembleMember {
  int index = 0;
  /// Row of the built-in configuration table.
  int configuration = 0;
  std::uint64_t seed = 0;
  GridSpec grid{1, 1, 1};
  double p = 2.0;
  WeightFamily weight = WeightFamily::random_log_bounded;
};

/// Eight (d, N, n, p) configurations cycled over `config.members` members,
/// each with a seed derived from the master seed and its index.
std::vector<EnsembleMember> build_ensemble(const ExperimentConfig& config);
WeightFamilySpec member_weight_spec(const EnsembleMember& member, const ExperimentConfig& config);
WeightPair member_weights(const EnsembleMember& member, const ExperimentConfig& config);
/// Test function `index` of a member (seeded from the member seed).
CellField member_function(const EnsembleMember& member, const ExperimentConfig& config, int index = 0);
nlohmann::json member_to_json(const EnsembleMember& member, const ExperimentConfig& config);

/// [U,V]^{1/p} [V^{-p'/p}]_{wk}^{1/p}, times [U]_{wk}^{1/2 - 1/p} when p > 2.
double theorem_bound(const Characteristics& c);

/// Suite slack 10 · C_n for "≲" claims.
inline double suite_constant(int n, double tolerance) { return 10.0 * reducing_constant(n, tolerance); }

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double standard_error = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  int points = 0;
};
/// Least-squares slope of log y against log x with a 95% t-interval; zero
/// slope when the x values do not vary.
SlopeFit loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

nlohmann::json family_to_json(const SparseFamily& family);
nlohmann::json corona_to_json(const CoronaDecomposition& dec, const CoronaCheck& check);
nlohmann::json characteristics_to_json(const Characteristics& c);

const std::vector<std::string>& domination_columns();
const std::vector<std::string>& norm_bound_columns();
const std::vector<std::string>& sharpness_columns();
const std::vector<std::string>& characteristics_columns();

/// Sparse family, pointwise domination, corona and Carleson checks per member.
ExperimentReport run_domination_experiment(const ExperimentConfig& config);
/// Characteristics, bound and norm lower bound per member and exponent.
ExperimentReport run_norm_bound_experiment(const ExperimentConfig& config);
/// Exploratory α sweep with a log-log fit of estimate against [U]_{A_p}.
ExperimentReport run_sharpness_scan(const ExperimentConfig& config);
/// Characteristics of a given pair for each configured exponent.
ExperimentReport run_characteristics(const MatrixWeightField& u, const MatrixWeightField& v,
                                     const ExperimentConfig& config);
/// Invariant suite: Haar identities, scalar reduction, reducing guarantee,
/// brute-force agreement on small grids, Carleson lemma and the domination run.
ExperimentReport run_verify_suite(const ExperimentConfig& config);

}  // namespace mwsq
