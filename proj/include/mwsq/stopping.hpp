#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "mwsq/errors.hpp"
#include "mwsq/family.hpp"
#include "mwsq/field.hpp"
#include "mwsq/haar.hpp"
#include "mwsq/operators.hpp"
#include "mwsq/reducing.hpp"
#include "mwsq/weight_field.hpp"

namespace mwsq {

struct StoppingConfig {
  double lambda = 16.0;
  double escalation_factor = 2.0;
  int max_escalations = 20;

  void validate() const;
};

inline constexpr double kDefaultSparseLambda = 16.0;
inline constexpr double kDefaultCoronaLambda = 8.0;

/// Everything the stopping times need about (U, p, f): the Haar coefficients
/// of f and the forward reducing matrices 𝒰_Q of U for every cube Q. Built
/// once and shared by every λ tried during calibration.
class StoppingContext {
 public:
  StoppingContext(const MatrixWeightField& u, double p, CellField f, const ReducingOptions& options = {});
  /// Reuses reducing matrices already fitted for (u, p).
  StoppingContext(const MatrixWeightField& u, double p, CellField f, std::shared_ptr<const ReducingMatrices> reducing);

  const MatrixWeightField& weight() const { return *u_; }
  double p() const { return p_; }
  const CellField& f() const { return f_; }
  const GridSpec& grid() const { return f_.grid(); }
  const HaarCoefficients& coefficients() const { return coeffs_; }
  const ReducingMatrices& reducing() const { return *reducing_; }
  std::shared_ptr<const ReducingMatrices> shared_reducing() const { return reducing_; }
  /// ⟨|𝒰_Q f|⟩_Q for every cube id.
  const std::vector<double>& own_averages() const { return own_averages_; }
  /// ⨍_L |A f| for every subcube L of J, indexed by (level − J.level, relative Morton).
  std::vector<std::vector<double>> subcube_averages(const DyadicCube& j, const double* a) const;

 private:
  const MatrixWeightField* u_;
  double p_;
  CellField f_;
  HaarCoefficients coeffs_;
  std::shared_ptr<const ReducingMatrices> reducing_;
  std::vector<double> own_averages_;
};

/// Maximal strict subcubes L of J with Σ_{J ⊇ I ⊇ L} |𝒰_J f_I|²/|I| > λ⟨|𝒰_J f|⟩_J²,
/// found by one root-to-leaf pass over running sums. Empty when f vanishes on J.
std::vector<DyadicCube> stopping_children_sq(const StoppingContext& ctx, const DyadicCube& j, double lambda);

/// Iterated square-function stopping time from the top cube, labelled by generation.
SparseFamily build_sparse_family(const StoppingContext& ctx, double lambda);

struct SparseCheck {
  bool sparse = true;
  /// max_J |∪{L ⊊ J, L ∈ family}| / |J|
  double worst_ratio = 0.0;
  DyadicCube worst_cube;
};
/// Exact measure check of the ½ sparsity condition via integer cell counts.
SparseCheck verify_sparse(const SparseFamily& family);

/// max_x S_{U,p} f(x) / S̃_{U,L} f(x).
RatioCheck verify_pointwise_domination(const StoppingContext& ctx, const SparseFamily& family);

struct DisjointSets {
  /// E_L as Morton cell lists, in member order.
  std::vector<std::vector<std::uint64_t>> cells;
  bool disjoint = true;
  /// max_L |L| / |E_L| (≤ 2 for sparse families).
  double worst_ratio = 1.0;
  bool measure_bound = true;
};
DisjointSets disjoint_sets(const SparseFamily& family);

struct WeakTypeStep {
  /// max_J √λ |{x ∈ J : S_d(𝒰_J 1_J f)(x) ≥ √λ ⟨|𝒰_J f|⟩_J}| / |J|
  double constant = 0.0;
  /// max_J Σ_{L ∈ 𝒥(J)} |L| / |J|
  double packing = 0.0;
  /// Every stopping child lies inside the superlevel set.
  bool inclusion = true;
};
WeakTypeStep weak_type_step(const StoppingContext& ctx, const SparseFamily& family, double lambda);

struct CalibrationStep {
  double lambda = 0.0;
  bool passed = false;
  double margin = 0.0;
};

template <class Result>
struct Calibrated {
  Result result;
  double lambda = 0.0;
  std::vector<CalibrationStep> steps;
  /// Margins that grew when λ was raised.
  std::vector<std::string> findings;
};

/// Raises λ geometrically from config.lambda until verify(build(λ)) passes.
/// `verify` returns {passed, margin} with smaller margins meaning more room.
template <class Builder, class Verifier>
auto calibrate_lambda(Builder build, Verifier verify, const StoppingConfig& config)
    -> Calibrated<decltype(build(0.0))> {
  config.validate();
  Calibrated<decltype(build(0.0))> out{build(config.lambda), config.lambda, {}, {}};
  double lambda = config.lambda;
  for (int k = 0;; ++k) {
    const auto [passed, margin] = verify(out.result);
    if (!out.steps.empty() && margin > out.steps.back().margin) {
      out.findings.push_back("margin rose from " + std::to_string(out.steps.back().margin) + " to " +
                             std::to_string(margin) + " at lambda " + std::to_string(lambda));
    }
    out.steps.push_back({lambda, passed, margin});
    if (passed) {
      out.lambda = lambda;
      return out;
    }
    if (k == config.max_escalations) break;
    lambda *= config.escalation_factor;
    out.result = build(lambda);
  }
  std::string trace;
  for (const auto& s : out.steps) trace += " " + std::to_string(s.lambda) + ":" + std::to_string(s.margin);
  throw CalibrationError("lambda calibration exhausted after " + std::to_string(config.max_escalations) +
                         " escalations (lambda:margin" + trace + ")");
}

}  // namespace mwsq
