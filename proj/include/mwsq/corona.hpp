#pragma once

#include <cstdint>
#include <vector>

#include "mwsq/family.hpp"
#include "mwsq/stopping.hpp"

namespace mwsq {

/// Stopping-moment decomposition: generations 𝒢_k, stopping children 𝒢(J)
/// and the corona blocks ℰ(J) (cubes of J not inside any stopping child).
struct CoronaDecomposition {
  GridSpec grid;
  double lambda = 0.0;
  /// 𝒢 in generation order; parent is the stopping cube that produced it.
  std::vector<FamilyMember> stopping;
  /// 𝒢(J) for stopping[i].
  std::vector<std::vector<DyadicCube>> children;
  /// Index into `stopping` of the block owning each cube id, -1 if none.
  std::vector<std::int64_t> block;
};

/// Maximal strict subcubes L of J with ⨍_L |𝒰_J f| > λ ⨍_J |𝒰_J f| or ‖𝒰_L 𝒰_J^{-1}‖ > λ.
std::vector<DyadicCube> corona_children(const StoppingContext& ctx, const DyadicCube& j, double lambda);

CoronaDecomposition build_corona(const StoppingContext& ctx, double lambda);

struct CoronaCheck {
  /// max_J Σ_{L ∈ 𝒢(J)} |L| / |J|, checked against ¼ with exact cell counts.
  double worst_packing = 0.0;
  DyadicCube worst_packing_cube;
  bool packing = true;
  /// max over J ∈ 𝒢, L ∈ ℰ(J) of ⨍_L |𝒰_L f| / ⨍_J |𝒰_J f|.
  double worst_control = 0.0;
  double control_limit = 0.0;
  bool control = true;
  std::size_t skipped = 0;
  /// Cubes not owned by exactly one block, found by an independent recount.
  std::size_t partition_violations = 0;
  bool partition = true;

  bool passed() const { return packing && control && partition; }
};

/// Checks packing, corona control against λ² C_n and the block partition.
CoronaCheck verify_corona(const CoronaDecomposition& dec, const StoppingContext& ctx, double tolerance = 1e-6);

}  // namespace mwsq
