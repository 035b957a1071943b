#pragma once

#include "mwsq/field.hpp"
#include "mwsq/weight_field.hpp"

namespace mwsq {

/// (Σ_cells |f(cell)|^p · |cell|)^{1/p}; |·| is the Euclidean norm of the cell value.
double lp_norm(const CellField& f, double p);

/// (Σ_cells |V^{1/p}(cell) f(cell)|^p · |cell|)^{1/p} for a vector field f.
double weighted_lp_norm(const CellField& f, const MatrixWeightField& v, double p);

/// Fixed-blocking sum: the result does not depend on the thread count.
double deterministic_sum(std::span<const double> values);

}  // namespace mwsq
