#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "mwsq/field.hpp"
#include "mwsq/spd.hpp"

namespace mwsq {

struct WeightOptions {
  /// Eigenvalues below floor_rel · (largest eigenvalue over the field) are rejected.
  double floor_rel = kEigenFloorRel;
  /// Clamp offending eigenvalues up to the floor instead of rejecting.
  bool clamp = false;
  /// Per-cell condition number cap.
  double condition_cap = 1e12;
};

/// Piecewise-constant SPD matrix field with cached fractional powers.
///
/// The per-cell eigendecomposition is computed once on ingestion; power(t)
/// returns the field W^t, computed on first request and shared between
/// copies afterwards.
class MatrixWeightField {
 public:
  explicit MatrixWeightField(CellField base, WeightOptions options = {});

  const CellField& base() const { return base_; }
  const GridSpec& grid() const { return base_.grid(); }
  int n() const { return base_.grid().vector_dim(); }
  std::size_t cells() const { return base_.cells(); }

  /// Field of W(x)^t, row-major n×n per cell.
  const std::vector<double>& power(double t) const;
  std::span<const double> power_at(double t, std::size_t cell) const {
    const auto nn = static_cast<std::size_t>(n() * n());
    return {power(t).data() + cell * nn, nn};
  }

  std::span<const double> eigenvalues(std::size_t cell) const {
    return {eigenvalues_.data() + cell * n(), static_cast<std::size_t>(n())};
  }
  double max_condition() const { return max_condition_; }

  static MatrixWeightField identity(const GridSpec& grid);
  /// n = 1 convenience from a scalar field.
  static MatrixWeightField from_scalar(const CellField& w, WeightOptions options = {});

 private:
  struct Cache {
    std::mutex mutex;
    std::map<double, std::unique_ptr<const std::vector<double>>> powers;
  };

  CellField base_;
  std::vector<double> eigenvalues_;
  std::vector<double> eigenvectors_;
  double max_condition_ = 1.0;
  std::shared_ptr<Cache> cache_;
};

}  // namespace mwsq
