#include "mwsq/grid.hpp"

#include <cmath>
#include <string>

#include "mwsq/errors.hpp"

namespace mwsq {

GridSpec::GridSpec(int dimension, int depth, int vector_dim, std::uint64_t cell_cap)
    : dimension_(dimension), depth_(depth), vector_dim_(vector_dim) {
  if (dimension < 1) throw InputError("grid dimension must be positive");
  if (depth < 0) throw InputError("grid depth must be non-negative");
  if (vector_dim < 1) throw InputError("vector dimension must be positive");
  if (dimension * depth >= 63 || (std::uint64_t{1} << (dimension * depth)) > cell_cap) {
    throw InputError("grid with d=" + std::to_string(dimension) + ", N=" + std::to_string(depth) +
                     " exceeds the cell cap of " + std::to_string(cell_cap));
  }
}

double GridSpec::cell_measure() const { return std::ldexp(1.0, -depth_ * dimension_); }

std::uint64_t GridSpec::level_offset(int level) const {
  // (2^{ld} - 1) / (2^d - 1)
  const std::uint64_t per = std::uint64_t{1} << dimension_;
  return ((std::uint64_t{1} << (level * dimension_)) - 1) / (per - 1);
}

double measure(const DyadicCube& cube, int dimension) {
  return std::ldexp(1.0, -cube.level * dimension);
}

double side_length(const DyadicCube& cube) { return std::ldexp(1.0, -cube.level); }

std::uint64_t cube_id(const GridSpec& grid, const DyadicCube& cube) {
  return grid.level_offset(cube.level) + cube.morton;
}

DyadicCube cube_from_id(const GridSpec& grid, std::uint64_t id) {
  int level = 0;
  while (level < grid.depth() && grid.level_offset(level + 1) <= id) ++level;
  return {level, id - grid.level_offset(level)};
}

DyadicCube parent(const DyadicCube& cube, int dimension) {
  if (cube.level == 0) throw DomainError("the top cube has no parent");
  return {cube.level - 1, cube.morton >> dimension};
}

DyadicCube child(const DyadicCube& cube, int dimension, int code) {
  return {cube.level + 1, (cube.morton << dimension) | static_cast<std::uint64_t>(code)};
}

int child_code(const DyadicCube& cube, int dimension) {
  return static_cast<int>(cube.morton & ((std::uint64_t{1} << dimension) - 1));
}

bool contains(const DyadicCube& outer, const DyadicCube& inner, int dimension) {
  if (inner.level < outer.level) return false;
  return (inner.morton >> ((inner.level - outer.level) * dimension)) == outer.morton;
}

DyadicCube ancestor_at(const DyadicCube& cube, int dimension, int level) {
  if (level > cube.level) throw DomainError("ancestor level below cube level");
  return {level, cube.morton >> ((cube.level - level) * dimension)};
}

CellRange cell_range(const GridSpec& grid, const DyadicCube& cube) {
  const int shift = (grid.depth() - cube.level) * grid.dimension();
  return {cube.morton << shift, (cube.morton + 1) << shift};
}

DyadicCube cell_cube(const GridSpec& grid, std::uint64_t cell) { return {grid.depth(), cell}; }

std::vector<std::uint64_t> coordinates(const DyadicCube& cube, int dimension) {
  std::vector<std::uint64_t> k(dimension, 0);
  for (int j = 0; j < cube.level; ++j) {
    const std::uint64_t code = (cube.morton >> (dimension * (cube.level - 1 - j))) &
                               ((std::uint64_t{1} << dimension) - 1);
    for (int i = 0; i < dimension; ++i) {
      k[i] = (k[i] << 1) | ((code >> i) & 1U);
    }
  }
  return k;
}

DyadicCube cube_from_coordinates(int level, const std::vector<std::uint64_t>& coords) {
  const int dimension = static_cast<int>(coords.size());
  std::uint64_t m = 0;
  for (int j = 0; j < level; ++j) {
    std::uint64_t code = 0;
    for (int i = 0; i < dimension; ++i) {
      code |= ((coords[i] >> (level - 1 - j)) & 1U) << i;
    }
    m = (m << dimension) | code;
  }
  return {level, m};
}

std::uint64_t morton_to_lexicographic(const GridSpec& grid, std::uint64_t cell) {
  const auto k = coordinates(cell_cube(grid, cell), grid.dimension());
  std::uint64_t lex = 0;
  for (int i = 0; i < grid.dimension(); ++i) lex = (lex << grid.depth()) | k[i];
  return lex;
}

std::uint64_t lexicographic_to_morton(const GridSpec& grid, std::uint64_t lex) {
  const int d = grid.dimension();
  std::vector<std::uint64_t> k(d);
  const std::uint64_t mask = (std::uint64_t{1} << grid.depth()) - 1;
  for (int i = d - 1; i >= 0; --i) {
    k[i] = lex & mask;
    lex >>= grid.depth();
  }
  return cube_from_coordinates(grid.depth(), k).morton;
}

std::vector<double> cell_center(const GridSpec& grid, std::uint64_t cell) {
  const auto k = coordinates(cell_cube(grid, cell), grid.dimension());
  std::vector<double> x(k.size());
  const double h = std::ldexp(1.0, -grid.depth());
  for (std::size_t i = 0; i < k.size(); ++i) x[i] = (static_cast<double>(k[i]) + 0.5) * h;
  return x;
}

}  // namespace mwsq
