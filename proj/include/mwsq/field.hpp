#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mwsq/grid.hpp"

namespace mwsq {

enum class FieldKind { scalar, vector, matrix };

std::string to_string(FieldKind kind);
FieldKind parse_field_kind(const std::string& text);

/// Piecewise-constant field at the finest resolution of a grid: one scalar,
/// n-vector or row-major n×n matrix per cell, stored in Morton cell order.
class CellField {
 public:
  CellField(GridSpec grid, FieldKind kind);
  CellField(GridSpec grid, FieldKind kind, std::vector<double> values);

  const GridSpec& grid() const { return grid_; }
  FieldKind kind() const { return kind_; }
  std::size_t arity() const { return arity_; }
  std::size_t cells() const { return static_cast<std::size_t>(grid_.cells()); }

  std::span<const double> cell(std::size_t i) const { return {values_.data() + i * arity_, arity_}; }
  std::span<double> cell(std::size_t i) { return {values_.data() + i * arity_, arity_}; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  bool operator==(const CellField&) const = default;

 private:
  GridSpec grid_;
  FieldKind kind_;
  std::size_t arity_;
  std::vector<double> values_;
};

std::size_t arity_of(FieldKind kind, int vector_dim);

/// Exact mean of `f` over the cells of `cube`, one entry per component.
std::vector<double> average(const CellField& f, const DyadicCube& cube);

/// Text field file: header `d N n kind`, then one line per cell in
/// lexicographic cell order.
void write_field_text(const CellField& f, const std::filesystem::path& path);
CellField read_field_text(const std::filesystem::path& path);

/// Raw little-endian float64 values in lexicographic cell order, with the
/// `d N n kind` header in a sidecar file `<path>.hdr`.
void write_field_binary(const CellField& f, const std::filesystem::path& path);
CellField read_field_binary(const std::filesystem::path& path);

/// Dispatches on a `.bin` extension; everything else is text.
CellField read_field(const std::filesystem::path& path);

}  // namespace mwsq
