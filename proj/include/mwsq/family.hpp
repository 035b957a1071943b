#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mwsq/grid.hpp"

namespace mwsq {

struct FamilyMember {
  DyadicCube cube;
  int generation = 0;
  /// Stopping cube whose stopping children include this member.
  std::optional<DyadicCube> parent;
};

/// A collection of dyadic cubes of one grid, labelled by stopping generation.
class SparseFamily {
 public:
  explicit SparseFamily(GridSpec grid, DyadicCube top = top_cube());

  /// Adds a cube; duplicates are ignored. Returns whether it was new.
  bool add(const DyadicCube& cube, int generation = 0, std::optional<DyadicCube> parent = std::nullopt);

  const GridSpec& grid() const { return grid_; }
  const DyadicCube& top() const { return top_; }
  const std::vector<FamilyMember>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }
  bool contains(const DyadicCube& cube) const { return member_index(cube_id(grid_, cube)) >= 0; }
  /// Member position for a cube id, or -1.
  std::int64_t member_index(std::uint64_t id) const { return index_[id]; }
  int generations() const;

 private:
  GridSpec grid_;
  DyadicCube top_;
  std::vector<FamilyMember> members_;
  std::vector<std::int64_t> index_;
};

}  // namespace mwsq
