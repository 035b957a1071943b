#pragma once

#include <vector>

#include <Eigen/Dense>

#include "mwsq/family.hpp"
#include "mwsq/field.hpp"
#include "mwsq/haar.hpp"
#include "mwsq/operators.hpp"
#include "mwsq/reducing.hpp"
#include "mwsq/stopping.hpp"
#include "mwsq/weight_field.hpp"

/// Naive single-threaded kernels that follow the defining formulas literally.
/// They back the benchmark comparison and the `verify` suite; the parallel
/// kernels must agree with them to rounding.
namespace mwsq::reference {

/// f_J^σ = Σ_{cells ⊆ J} f(cell) h_J^σ(cell) |cell|.
HaarCoefficients haar_transform(const CellField& f);

/// Per cell: Σ_{J ∋ x, σ} |U^{1/p}(x) f_J^σ|² / |J| with fresh matrix powers.
CellField square_function(const MatrixWeightField& u, double p, const CellField& f);

/// Per cube: ⨍_x (⨍_y ‖V^{-1/p}(y) U^{1/p}(x)‖^{p'})^{p/p'} by a direct double loop.
double ap_characteristic(const MatrixWeightField& u, const MatrixWeightField& v, double p);

/// Per cube I: Σ_{x ∈ I} max_{Q ∋ x, Q ⊆ I} ⨍_Q w / Σ_{x ∈ I} w.
double a_infty_fujii_wilson(const CellField& w);

/// (Σ_{L ∋ x} ⟨|𝒰_L f|⟩_L^r ‖U^{1/p}(x) 𝒰_L^{-1}‖^r)^{1/r} with Eigen matrices.
CellField sparse_operator(const MatrixWeightField& u, double p, double r, const SparseFamily& family,
                          const CellField& f, const ReducingMatrices& reducing);

/// sup_J ⨍_J (Σ_{L ⊆ J} a_L(x))^{p/r}.
double carleson_star_norm(const CoefficientField& a, double p, double r);

/// One fit_reducing_matrix call per cube, in id order.
std::vector<Eigen::MatrixXd> reducing_matrices(const MatrixWeightField& w, double p, ReducingKind kind,
                                               const ReducingOptions& options = {});

/// Exhaustive scan: every strict subcube L of J is tested on its own sum,
/// then non-maximal hits are dropped.
std::vector<DyadicCube> stopping_children_sq(const StoppingContext& ctx, const DyadicCube& j, double lambda);
std::vector<DyadicCube> corona_children(const StoppingContext& ctx, const DyadicCube& j, double lambda);

}  // namespace mwsq::reference
