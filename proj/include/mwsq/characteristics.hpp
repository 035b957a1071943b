#pragma once

#include <vector>

#include <Eigen/Dense>

#include "mwsq/field.hpp"
#include "mwsq/reducing.hpp"
#include "mwsq/weight_field.hpp"

namespace mwsq {

/// A supremum over the dyadic cubes of the grid and the cube attaining it.
struct CubeSup {
  double value = 0.0;
  DyadicCube argmax;
};

/// Two-weight matrix A_p characteristic restricted to dyadic cubes:
/// sup_I ⨍_I (⨍_I ‖V^{-1/p}(y) U^{1/p}(x)‖^{p'} dy)^{p/p'} dx, by exact double sums.
CubeSup ap_characteristic(const MatrixWeightField& u, const MatrixWeightField& v, double p);

/// sup_I ‖𝒰_I 𝒱_I'‖^p with 𝒰_I the forward reducing matrix of U and 𝒱_I'
/// the dual reducing matrix of V.
CubeSup ap_characteristic_reduced(const MatrixWeightField& u, const MatrixWeightField& v, double p,
                                  const ReducingOptions& options = {});

/// Dyadic Fujii–Wilson A_∞ characteristic sup_I (∫_I w)^{-1} ∫_I M_d(w 1_I).
CubeSup a_infty_fujii_wilson(const CellField& w);

/// x ↦ |U^{1/p}(x) e|^p as a scalar field.
CellField directional_weight(const MatrixWeightField& u, double p, const Eigen::VectorXd& e);

struct ApwkOptions {
  /// Sampled directions; 0 selects max(64, 2n²).
  int directions = 0;
  /// Local search on the sphere around the best sampled direction.
  bool refine = true;
  int refine_rounds = 24;
};

struct ApwkResult {
  /// max(sampled, refined): the reported characteristic.
  double value = 0.0;
  /// Best value over the sampled directions only; [sampled, value] is the
  /// observed sampling gap.
  double sampled = 0.0;
  Eigen::VectorXd direction;
  int directions_used = 0;
  DyadicCube argmax;
};

/// sup_e [ |U^{1/p} e|^p ]_{A_∞}, approximated by direction sampling.
ApwkResult apwk_characteristic(const MatrixWeightField& u, double p, const ApwkOptions& options = {});

struct ReverseHolder {
  double epsilon = 0.0;
  /// sup_I (⨍ w^{1+ε})^{1/(1+ε)} / ⨍ w at the returned ε (≤ 2).
  double constant = 1.0;
  double a_infty = 1.0;
  double epsilon_times_a_infty = 0.0;
};

/// Largest ε = 2^{-k}, k = 0..max_halvings, with reverse Hölder constant ≤ 2.
ReverseHolder reverse_holder_exponent(const CellField& w, int max_halvings = 30);

/// sup_I (⨍_I w^{1+ε})^{1/(1+ε)} / ⨍_I w.
double reverse_holder_constant(const CellField& w, double epsilon);

struct Characteristics {
  double p = 2.0;
  double ap = 0.0;
  DyadicCube ap_argmax;
  double ap_reduced = 0.0;
  DyadicCube ap_reduced_argmax;
  /// [U]_{A_p^wk}
  double apwk = 0.0;
  double apwk_sampled = 0.0;
  /// [V^{-p'/p}]_{A_{p'}^wk}
  double apwk_dual = 0.0;
  double apwk_dual_sampled = 0.0;
  int directions_used = 0;
  /// Reverse Hölder exponent of the extremal directional weight of V^{-p'/p}.
  double rh_epsilon = 0.0;
  double rh_epsilon_times_a_infty = 0.0;
};

Characteristics compute_characteristics(const MatrixWeightField& u, const MatrixWeightField& v, double p,
                                        const ReducingOptions& reducing = {}, const ApwkOptions& apwk = {});

}  // namespace mwsq
