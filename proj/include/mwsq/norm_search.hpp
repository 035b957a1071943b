#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "mwsq/field.hpp"
#include "mwsq/weight_field.hpp"

namespace mwsq {

/// Maps a vector field to a nonnegative scalar field (S_{U,p}, S̃_{U,L}, ...).
using VectorOperator = std::function<CellField(const CellField&)>;

struct NormSearchOptions {
  int trials = 8;
  std::uint64_t seed = 1;
  int greedy_rounds = 3;
  int moves_per_round = 16;
  /// Extra fixed candidates; the bound is at least the best ratio among them.
  std::vector<CellField> dictionary;
};

struct NormSearchResult {
  double lower_bound = 0.0;
  std::size_t evaluations = 0;
  std::size_t skipped = 0;
  /// Trial index of the best candidate, or -1 when it came from the dictionary.
  int best_trial = -1;
};

/// Lower bound for ‖op‖_{L^p(V) → L^p}: the best ratio ‖op f‖_{L^p} / ‖f‖_{L^p(V)}
/// over random Haar-coefficient, weight-adapted and localized candidates,
/// each refined by greedy sign/scale moves on dyadic blocks. Deterministic
/// given the seed; trial t draws from a stream derived from (seed, t).
NormSearchResult operator_norm_lower_bound(const VectorOperator& op, double p, const MatrixWeightField& v,
                                           const NormSearchOptions& options = {});

/// splitmix64 step, used to derive per-trial and per-member seeds.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace mwsq
