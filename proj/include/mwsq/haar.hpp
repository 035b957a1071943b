#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mwsq/field.hpp"
#include "mwsq/grid.hpp"

namespace mwsq {

/// Tensor-product Haar function on `cube`: coordinate i carries the
/// lower/upper half sign when bit i of `signature` is set and the indicator
/// otherwise. Signatures run over 1 .. 2^d - 1.
struct HaarSignature {
  DyadicCube cube;
  int signature = 1;
};

/// Sign (+1/-1) of the unnormalized Haar pattern `signature` on child `code`.
inline int haar_sign(int signature, int code) {
  return (__builtin_popcount(static_cast<unsigned>(signature & code)) & 1) ? -1 : 1;
}

/// h(cell) for a finest cell inside h.cube: ±|h.cube|^{-1/2}.
double haar_value(const GridSpec& grid, const HaarSignature& h, const DyadicCube& cell);

/// Haar coefficients f_J^σ = ∫ f h_J^σ for every cube above the finest level
/// plus the average over [0,1)^d. Each coefficient is a vector of `width()`
/// components (1 for scalar fields, n for vector fields).
class HaarCoefficients {
 public:
  HaarCoefficients(GridSpec grid, std::size_t width);

  const GridSpec& grid() const { return grid_; }
  std::size_t width() const { return width_; }

  std::span<const double> at(std::uint64_t cube_id, int signature) const {
    return {coeffs_.data() + offset(cube_id, signature), width_};
  }
  std::span<double> at(std::uint64_t cube_id, int signature) {
    return {coeffs_.data() + offset(cube_id, signature), width_};
  }
  std::span<const double> at(const HaarSignature& h) const { return at(cube_id(grid_, h.cube), h.signature); }

  std::span<const double> top_average() const { return top_average_; }
  std::span<double> top_average() { return top_average_; }

  /// Number of cubes carrying Haar functions (levels 0 .. N-1).
  std::uint64_t haar_cubes() const { return grid_.level_offset(grid_.depth()); }

 private:
  std::size_t offset(std::uint64_t id, int signature) const {
    return (static_cast<std::size_t>(id) * static_cast<std::size_t>(grid_.signatures()) +
            static_cast<std::size_t>(signature - 1)) * width_;
  }

  GridSpec grid_;
  std::size_t width_;
  std::vector<double> coeffs_;
  std::vector<double> top_average_;
};

/// Exact Haar transform of a scalar or vector field (bottom-up cube sums).
HaarCoefficients haar_transform(const CellField& f);

/// Inverse of haar_transform; `kind` selects scalar/vector output.
CellField haar_reconstruct(const HaarCoefficients& coeffs, FieldKind kind);

/// Integrals ∫_Q f for every cube Q, indexed by cube id, `width` entries each.
std::vector<double> cube_integrals(const CellField& f);

}  // namespace mwsq
