#include "mwsq/haar.hpp"

#include <cmath>

#include "mwsq/errors.hpp"

namespace mwsq {

double haar_value(const GridSpec& grid, const HaarSignature& h, const DyadicCube& cell) {
  const int d = grid.dimension();
  if (h.signature < 1 || h.signature >= grid.children_per_cube()) {
    throw DomainError("Haar signature out of range");
  }
  if (h.cube.level >= grid.depth()) throw DomainError("no Haar functions live on finest cells");
  if (cell.level != grid.depth()) throw DomainError("haar_value expects a finest cell");
  if (!contains(h.cube, cell, d)) throw DomainError("cell lies outside the Haar function's cube");
  const int code = child_code(ancestor_at(cell, d, h.cube.level + 1), d);
  return haar_sign(h.signature, code) / std::sqrt(measure(h.cube, d));
}

HaarCoefficients::HaarCoefficients(GridSpec grid, std::size_t width)
    : grid_(grid), width_(width),
      coeffs_(static_cast<std::size_t>(grid.level_offset(grid.depth())) * grid.signatures() * width, 0.0),
      top_average_(width, 0.0) {}

std::vector<double> cube_integrals(const CellField& f) {
  const GridSpec& g = f.grid();
  const std::size_t w = f.arity();
  const int d = g.dimension();
  const int kids = g.children_per_cube();
  std::vector<double> sums(static_cast<std::size_t>(g.total_cubes()) * w);

  const double cell = g.cell_measure();
  const auto finest = static_cast<std::int64_t>(g.cells());
  double* leaf = sums.data() + g.level_offset(g.depth()) * w;
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < finest; ++c) {
    const auto v = f.cell(static_cast<std::size_t>(c));
    for (std::size_t a = 0; a < w; ++a) leaf[c * w + a] = v[a] * cell;
  }
  for (int level = g.depth() - 1; level >= 0; --level) {
    double* out = sums.data() + g.level_offset(level) * w;
    const double* in = sums.data() + g.level_offset(level + 1) * w;
    const auto count = static_cast<std::int64_t>(g.cubes_at(level));
#pragma omp parallel for schedule(static)
    for (std::int64_t m = 0; m < count; ++m) {
      for (std::size_t a = 0; a < w; ++a) {
        double s = 0.0;
        for (int c = 0; c < kids; ++c) s += in[((m << d) + c) * w + a];
        out[m * w + a] = s;
      }
    }
  }
  return sums;
}

HaarCoefficients haar_transform(const CellField& f) {
  if (f.kind() == FieldKind::matrix) throw InputError("haar_transform takes scalar or vector fields");
  const GridSpec& g = f.grid();
  const std::size_t w = f.arity();
  const int d = g.dimension();
  const int kids = g.children_per_cube();
  const auto sums = cube_integrals(f);

  HaarCoefficients out(g, w);
  for (std::size_t a = 0; a < w; ++a) out.top_average()[a] = sums[a];

  for (int level = 0; level < g.depth(); ++level) {
    const double scale = 1.0 / std::sqrt(std::ldexp(1.0, -level * d));
    const double* below = sums.data() + g.level_offset(level + 1) * w;
    const auto count = static_cast<std::int64_t>(g.cubes_at(level));
    const std::uint64_t base = g.level_offset(level);
#pragma omp parallel for schedule(static)
    for (std::int64_t m = 0; m < count; ++m) {
      for (int sig = 1; sig < kids; ++sig) {
        auto coeff = out.at(base + static_cast<std::uint64_t>(m), sig);
        for (std::size_t a = 0; a < w; ++a) {
          double s = 0.0;
          for (int c = 0; c < kids; ++c) s += haar_sign(sig, c) * below[((m << d) + c) * w + a];
          coeff[a] = s * scale;
        }
      }
    }
  }
  return out;
}

CellField haar_reconstruct(const HaarCoefficients& coeffs, FieldKind kind) {
  const GridSpec& g = coeffs.grid();
  const std::size_t w = coeffs.width();
  if (arity_of(kind, g.vector_dim()) != w) throw InputError("reconstruction kind does not match width");
  const int d = g.dimension();
  const int kids = g.children_per_cube();

  // Top-down: value on a cube is the average of f over that cube.
  std::vector<double> current(coeffs.top_average().begin(), coeffs.top_average().end());
  for (int level = 0; level < g.depth(); ++level) {
    const double scale = 1.0 / std::sqrt(std::ldexp(1.0, -level * d));
    const auto count = static_cast<std::int64_t>(g.cubes_at(level));
    const std::uint64_t base = g.level_offset(level);
    std::vector<double> next(static_cast<std::size_t>(count) * kids * w);
#pragma omp parallel for schedule(static)
    for (std::int64_t m = 0; m < count; ++m) {
      for (int c = 0; c < kids; ++c) {
        for (std::size_t a = 0; a < w; ++a) {
          double v = current[m * w + a];
          for (int sig = 1; sig < kids; ++sig) {
            v += haar_sign(sig, c) * scale * coeffs.at(base + static_cast<std::uint64_t>(m), sig)[a];
          }
          next[((m << d) + c) * w + a] = v;
        }
      }
    }
    current = std::move(next);
  }
  return CellField(g, kind, std::move(current));
}

}  // namespace mwsq
