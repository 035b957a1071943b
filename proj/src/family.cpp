#include "mwsq/family.hpp"

#include <algorithm>

#include "mwsq/errors.hpp"

namespace mwsq {

SparseFamily::SparseFamily(GridSpec grid, DyadicCube top)
    : grid_(grid), top_(top), index_(grid.total_cubes(), -1) {}

bool SparseFamily::add(const DyadicCube& cube, int generation, std::optional<DyadicCube> parent) {
  if (cube.level > grid_.depth() || cube.morton >= grid_.cubes_at(cube.level)) {
    throw DomainError("cube lies outside the grid");
  }
  const auto id = cube_id(grid_, cube);
  if (index_[id] >= 0) return false;
  index_[id] = static_cast<std::int64_t>(members_.size());
  members_.push_back({cube, generation, parent});
  return true;
}

int SparseFamily::generations() const {
  int g = 0;
  for (const auto& m : members_) g = std::max(g, m.generation + 1);
  return g;
}

}  // namespace mwsq
