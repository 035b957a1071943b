#include "mwsq/field.hpp"

#include <cmath>

#include "mwsq/errors.hpp"

namespace mwsq {

std::string to_string(FieldKind kind) {
  switch (kind) {
    case FieldKind::scalar: return "scalar";
    case FieldKind::vector: return "vector";
    case FieldKind::matrix: return "matrix";
  }
  return "unknown";
}

FieldKind parse_field_kind(const std::string& text) {
  if (text == "scalar") return FieldKind::scalar;
  if (text == "vector") return FieldKind::vector;
  if (text == "matrix") return FieldKind::matrix;
  throw InputError("unknown field kind '" + text + "'");
}

std::size_t arity_of(FieldKind kind, int vector_dim) {
  const auto n = static_cast<std::size_t>(vector_dim);
  switch (kind) {
    case FieldKind::scalar: return 1;
    case FieldKind::vector: return n;
    case FieldKind::matrix: return n * n;
  }
  return 0;
}

CellField::CellField(GridSpec grid, FieldKind kind)
    : grid_(grid), kind_(kind), arity_(arity_of(kind, grid.vector_dim())),
      values_(static_cast<std::size_t>(grid.cells()) * arity_, 0.0) {}

CellField::CellField(GridSpec grid, FieldKind kind, std::vector<double> values)
    : grid_(grid), kind_(kind), arity_(arity_of(kind, grid.vector_dim())), values_(std::move(values)) {
  if (values_.size() != static_cast<std::size_t>(grid_.cells()) * arity_) {
    throw InputError("field has " + std::to_string(values_.size()) + " values, expected " +
                     std::to_string(grid_.cells() * arity_));
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw InputError("field contains a non-finite value");
  }
}

std::vector<double> average(const CellField& f, const DyadicCube& cube) {
  const auto range = cell_range(f.grid(), cube);
  if (range.end > f.cells()) throw DomainError("cube lies outside the grid");
  std::vector<double> acc(f.arity(), 0.0);
  for (std::uint64_t c = range.begin; c < range.end; ++c) {
    const auto v = f.cell(c);
    for (std::size_t a = 0; a < acc.size(); ++a) acc[a] += v[a];
  }
  for (double& a : acc) a /= static_cast<double>(range.size());
  return acc;
}

}  // namespace mwsq
