#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mwsq/grid.hpp"
#include "mwsq/spd.hpp"
#include "mwsq/weight_field.hpp"

namespace mwsq {

/// forward: ρ(e) = (⨍_I |W^{1/p} e|^p)^{1/p}
/// dual:    ρ'(e) = (⨍_I |W^{-1/p} e|^{p'})^{1/p'}
enum class ReducingKind { forward, dual };

struct ReducingOptions {
  /// Direction count for the ellipsoid fit; 0 selects 16 n².
  int directions = 0;
  double tolerance = 1e-6;
  int max_iterations = 100000;
  /// Use the ellipsoid fit even where a closed form exists (p = 2, n = 1).
  bool force_mvee = false;
};

inline int default_direction_count(int n) { return 16 * n * n; }

/// C_n = (√n (1 + tol))², the squared two-sided equivalence constant of a fitted reducing matrix.
inline double reducing_constant(int n, double tolerance) { return n * (1.0 + tolerance) * (1.0 + tolerance); }

/// ρ(e) or ρ'(e) by exact summation over the cells of I.
double directional_average_norm(const MatrixWeightField& w, const DyadicCube& cube, double p,
                                std::span<const double> e, ReducingKind kind);

struct ReducingFit {
  Eigen::MatrixXd matrix;
  /// Upper bound K on ρ(e) / |R e| over all directions (√(inner_sq) of the fit); 1 for closed forms.
  double upper_factor = 1.0;
  int iterations = 0;
  bool closed_form = false;
};

/// Reducing matrix R with |R e| ≤ ρ(e) on the sampled directions and
/// ρ(e) ≤ upper_factor·|R e| ≤ √(n(1+tol))·|R e| everywhere.
ReducingFit fit_reducing_matrix(const MatrixWeightField& w, const DyadicCube& cube, double p, ReducingKind kind,
                                const ReducingOptions& options = {});

SpdMatrix reducing_matrix(const MatrixWeightField& w, const DyadicCube& cube, double p,
                          const ReducingOptions& options = {});
SpdMatrix dual_reducing_matrix(const MatrixWeightField& w, const DyadicCube& cube, double p,
                               const ReducingOptions& options = {});

struct ReducingPair {
  DyadicCube cube;
  double p;
  SpdMatrix forward;  // 𝒰_I
  SpdMatrix dual;     // 𝒱_I'
};

ReducingPair reducing_pair(const MatrixWeightField& u, const MatrixWeightField& v, const DyadicCube& cube, double p,
                           const ReducingOptions& options = {});

/// Extremes of ρ(e)/|R e| over the given unit directions (columns).
struct ReducingRatio {
  double min_ratio;
  double max_ratio;
};
ReducingRatio reducing_ratio(const MatrixWeightField& w, const DyadicCube& cube, double p, ReducingKind kind,
                             const Eigen::MatrixXd& r, const Eigen::MatrixXd& directions);

/// Reducing matrices (and their inverses) for every cube of the grid,
/// computed level by level from per-cell directional integrands.
class ReducingMatrices {
 public:
  ReducingMatrices(const MatrixWeightField& w, double p, ReducingKind kind, const ReducingOptions& options = {});

  int n() const { return n_; }
  double p() const { return p_; }
  ReducingKind kind() const { return kind_; }
  const GridSpec& grid() const { return grid_; }

  const double* matrix(std::uint64_t id) const { return matrices_.data() + id * n_ * n_; }
  const double* inverse(std::uint64_t id) const { return inverses_.data() + id * n_ * n_; }
  Eigen::MatrixXd matrix_of(const DyadicCube& cube) const;

  /// Largest upper_factor over all cubes.
  double worst_upper_factor() const { return worst_upper_factor_; }
  long long total_iterations() const { return total_iterations_; }

 private:
  GridSpec grid_;
  int n_;
  double p_;
  ReducingKind kind_;
  std::vector<double> matrices_;
  std::vector<double> inverses_;
  double worst_upper_factor_ = 1.0;
  long long total_iterations_ = 0;
};

}  // namespace mwsq
