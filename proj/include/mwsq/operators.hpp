#pragma once

#include <map>
#include <span>
#include <vector>

#include "mwsq/characteristics.hpp"
#include "mwsq/family.hpp"
#include "mwsq/field.hpp"
#include "mwsq/haar.hpp"
#include "mwsq/reducing.hpp"
#include "mwsq/weight_field.hpp"

namespace mwsq {

/// S_{U,p} f(x) = (Σ_{J ∋ x, σ} |U^{1/p}(x) f_J^σ|² / |J|)^{1/2}, exact per cell.
/// On a depth-N grid this is the truncation to scales 2^{-N} .. 1.
CellField square_function(const MatrixWeightField& u, double p, const CellField& f);
CellField square_function(const MatrixWeightField& u, double p, const HaarCoefficients& coeffs);

/// Square function restricted to Haar terms of cubes L ⊆ j; zero outside j.
CellField localized_square_function(const MatrixWeightField& u, double p, const CellField& f, const DyadicCube& j);

/// Unweighted dyadic square function of a scalar or vector field.
CellField dyadic_square_function(const CellField& f);
CellField dyadic_square_function_scalar(const CellField& f);

/// M_d f(x) = max_{Q ∋ x} ⨍_Q |f|.
CellField dyadic_maximal(const CellField& f);

/// ⟨|𝒰_L f|⟩_L for every member L, in member order.
std::vector<double> reduced_averages(const SparseFamily& family, const CellField& f, const ReducingMatrices& reducing);

/// (Σ_{L ∋ x} ⟨|𝒰_L f|⟩_L^r ‖U^{1/p}(x) 𝒰_L^{-1}‖^r)^{1/r}.
CellField generalized_sparse_operator(const MatrixWeightField& u, double p, double r, const SparseFamily& family,
                                      const CellField& f, const ReducingMatrices& reducing);

/// r = 2 case of generalized_sparse_operator.
CellField sparse_positive_operator(const MatrixWeightField& u, double p, const SparseFamily& family,
                                   const CellField& f, const ReducingMatrices& reducing);
CellField sparse_positive_operator(const MatrixWeightField& u, double p, const SparseFamily& family,
                                   const CellField& f, const ReducingOptions& options = {});

/// Pointwise ratio between a numerator and denominator field; cells where
/// both vanish are skipped, numerator > 0 over a zero denominator is +∞.
struct RatioCheck {
  double max_ratio = 0.0;
  std::uint64_t argmax_cell = 0;
  std::size_t skipped = 0;
};
RatioCheck pointwise_ratio(const CellField& numerator, const CellField& denominator);

/// max_x Σ_L |U^{1/p}(x)⟨f⟩_L| 1_L(x) / (r = 1 sparse operator)(x).
RatioCheck linear_sparse_domination_check(const MatrixWeightField& u, double p, const SparseFamily& family,
                                          const CellField& f, const ReducingMatrices& reducing);

/// Nonnegative per-cube coefficient profiles a_L(x), each supported on L
/// and stored over the cells of L in Morton order.
class CoefficientField {
 public:
  explicit CoefficientField(GridSpec grid) : grid_(grid) {}

  void set(const DyadicCube& cube, std::vector<double> values);
  const GridSpec& grid() const { return grid_; }
  const std::map<std::uint64_t, std::vector<double>>& entries() const { return entries_; }
  const std::vector<double>* find(std::uint64_t id) const {
    auto it = entries_.find(id);
    return it == entries_.end() ? nullptr : &it->second;
  }

 private:
  GridSpec grid_;
  std::map<std::uint64_t, std::vector<double>> entries_;
};

/// a_L(x) = ‖U^{1/p}(x) 𝒰_L^{-1}‖² for L in the family, 0 elsewhere.
CoefficientField sparse_family_coefficients(const MatrixWeightField& u, double p, const SparseFamily& family,
                                            const ReducingMatrices& reducing);

/// (Σ_L a_L(x) ⟨|𝒰_L f|⟩_L^r 1_L(x))^{1/r}.
CellField carleson_operator(const MatrixWeightField& u, double p, double r, const CoefficientField& a,
                            const CellField& f, const ReducingMatrices& reducing);

/// ‖A‖_* = sup_J ⨍_J (Σ_{L ⊆ J} a_L(x) 1_L(x))^{p/r} dx.
CubeSup carleson_star_norm(const CoefficientField& a, double p, double r);

/// ‖τ‖_* = sup_J |J|^{-1} Σ_{L ⊆ J} τ_L for a per-cube-id sequence.
double carleson_sequence_norm(const GridSpec& grid, std::span<const double> tau);

struct CarlesonSequenceCheck {
  double lhs = 0.0;          // Σ_Q τ_Q ⟨|f|⟩_Q^q
  double tau_norm = 0.0;     // ‖τ‖_*
  double f_norm_q_pow = 0.0; // ‖f‖_q^q
  double delta = 0.0;        // q - 1
  /// lhs · δ / (‖τ‖_* ‖f‖_q^q): the constant C in lhs ≤ C δ^{-1} ‖τ‖_* ‖f‖_q^q.
  double constant = 0.0;
};
CarlesonSequenceCheck scalar_carleson_embedding_check(const GridSpec& grid, std::span<const double> tau,
                                                      const CellField& f, double q);

}  // namespace mwsq
