#pragma once

#include <cstdint>
#include <vector>

namespace mwsq {

inline constexpr std::uint64_t kDefaultCellCap = std::uint64_t{1} << 24;

/// Finite dyadic grid on [0,1)^d truncated at depth N, carrying fields with
/// values in R^n.
///
/// Cells and cubes are addressed in Morton (bit-interleaved) order, so every
/// dyadic cube covers a contiguous range of finest cells. Child code bit i
/// selects the upper half along coordinate i.
class GridSpec {
 public:
  GridSpec(int dimension, int depth, int vector_dim, std::uint64_t cell_cap = kDefaultCellCap);

  int dimension() const { return dimension_; }
  int depth() const { return depth_; }
  int vector_dim() const { return vector_dim_; }

  std::uint64_t cells() const { return std::uint64_t{1} << (depth_ * dimension_); }
  int children_per_cube() const { return 1 << dimension_; }
  int signatures() const { return children_per_cube() - 1; }
  double cell_measure() const;

  std::uint64_t cubes_at(int level) const { return std::uint64_t{1} << (level * dimension_); }
  /// Id of the first cube at `level` in the global level-major numbering.
  std::uint64_t level_offset(int level) const;
  std::uint64_t total_cubes() const { return level_offset(depth_ + 1); }

  bool same_shape(const GridSpec& other) const {
    return dimension_ == other.dimension_ && depth_ == other.depth_;
  }
  bool operator==(const GridSpec& other) const = default;

 private:
  int dimension_;
  int depth_;
  int vector_dim_;
};

struct DyadicCube {
  int level = 0;
  std::uint64_t morton = 0;

  bool operator==(const DyadicCube&) const = default;
  auto operator<=>(const DyadicCube&) const = default;
};

inline DyadicCube top_cube() { return {0, 0}; }

double measure(const DyadicCube& cube, int dimension);
double side_length(const DyadicCube& cube);

std::uint64_t cube_id(const GridSpec& grid, const DyadicCube& cube);
DyadicCube cube_from_id(const GridSpec& grid, std::uint64_t id);

DyadicCube parent(const DyadicCube& cube, int dimension);
DyadicCube child(const DyadicCube& cube, int dimension, int code);
/// Child code of `cube` within its parent.
int child_code(const DyadicCube& cube, int dimension);

/// Whether `outer` contains `inner` (non-strict).
bool contains(const DyadicCube& outer, const DyadicCube& inner, int dimension);
DyadicCube ancestor_at(const DyadicCube& cube, int dimension, int level);

struct CellRange {
  std::uint64_t begin;
  std::uint64_t end;
  std::uint64_t size() const { return end - begin; }
};

/// Finest cells covered by `cube`.
CellRange cell_range(const GridSpec& grid, const DyadicCube& cube);
DyadicCube cell_cube(const GridSpec& grid, std::uint64_t cell);
/// Ancestor of finest cell `cell` at `level`, as a Morton index.
inline std::uint64_t cell_ancestor(const GridSpec& grid, std::uint64_t cell, int level) {
  return cell >> ((grid.depth() - level) * grid.dimension());
}

std::vector<std::uint64_t> coordinates(const DyadicCube& cube, int dimension);
DyadicCube cube_from_coordinates(int level, const std::vector<std::uint64_t>& coords);

/// Row-major lexicographic cell index (first coordinate slowest) for a Morton cell.
std::uint64_t morton_to_lexicographic(const GridSpec& grid, std::uint64_t cell);
std::uint64_t lexicographic_to_morton(const GridSpec& grid, std::uint64_t lex);

/// Center of a finest cell in [0,1)^d.
std::vector<double> cell_center(const GridSpec& grid, std::uint64_t cell);

}  // namespace mwsq
