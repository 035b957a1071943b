#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mwsq/field.hpp"
#include "mwsq/weight_field.hpp"

namespace mwsq {

enum class WeightFamily { scalar_power, matrix_rotation_power, random_log_bounded, two_weight_pair };

std::string to_string(WeightFamily family);
WeightFamily parse_weight_family(const std::string& text);

struct WeightFamilySpec {
  WeightFamily kind = WeightFamily::random_log_bounded;
  GridSpec grid{1, 4, 1};
  /// Power exponents: one for scalar-power, one per eigendirection (or one
  /// broadcast) for matrix-rotation-power.
  std::vector<double> alpha{0.0};
  /// Singularity location x₀; empty means the origin.
  std::vector<double> center;
  /// θ(x) = rotation · π · (x₁ + … + x_d) / d.
  double rotation = 0.0;
  /// Scale of the symmetric log field for random-log-bounded and two-weight-pair.
  double log_amplitude = 1.0;
  /// Per-level decay of the log-field Haar amplitudes.
  double decay = 0.7;
  std::uint64_t seed = 1;
  double condition_cap = 1e12;
};

struct WeightPair {
  MatrixWeightField u;
  MatrixWeightField v;
};

/// The weight U; for two-weight-pair this is the first of the pair.
MatrixWeightField generate_weight(const WeightFamilySpec& spec);
/// (U, V); V = U except for two-weight-pair, where V = exp(H_U + H') with an
/// independent log field H' of half the amplitude.
WeightPair generate_weight_pair(const WeightFamilySpec& spec);

/// Vector test function: Gaussian bumps on random dyadic cubes over a small
/// per-cell Gaussian background.
CellField generate_function(const GridSpec& grid, std::uint64_t seed, int bumps = 8);

/// Vector test function m(x)·g(x): m is a lognormal multiplicative cascade
/// (unit-mean multipliers exp(σξ − σ²/2) on every cube below the top, σ the
/// intermittency) and g is per-cell standard Gaussian.
CellField generate_cascade(const GridSpec& grid, std::uint64_t seed, double intermittency = 1.0);

}  // namespace mwsq
