#include "mwsq/norms.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "mwsq/errors.hpp"

namespace mwsq {
namespace {
constexpr std::int64_t kBlocks = 64;
}

double deterministic_sum(std::span<const double> values) {
  const auto size = static_cast<std::int64_t>(values.size());
  std::vector<double> partial(kBlocks, 0.0);
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < kBlocks; ++b) {
    const std::int64_t lo = size * b / kBlocks;
    const std::int64_t hi = size * (b + 1) / kBlocks;
    double s = 0.0;
    for (std::int64_t i = lo; i < hi; ++i) s += values[i];
    partial[b] = s;
  }
  double total = 0.0;
  for (double s : partial) total += s;
  return total;
}

double lp_norm(const CellField& f, double p) {
  if (!(p > 0.0)) throw InputError("lp_norm needs p > 0");
  const std::size_t cells = f.cells();
  std::vector<double> terms(cells);
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < static_cast<std::int64_t>(cells); ++c) {
    double s = 0.0;
    for (double v : f.cell(c)) s += v * v;
    terms[c] = std::pow(std::sqrt(s), p);
  }
  return std::pow(deterministic_sum(terms) * f.grid().cell_measure(), 1.0 / p);
}

double weighted_lp_norm(const CellField& f, const MatrixWeightField& v, double p) {
  if (!(p > 1.0)) throw InputError("weighted_lp_norm needs p > 1");
  if (!f.grid().same_shape(v.grid()) || f.arity() != static_cast<std::size_t>(v.n())) {
    throw InputError("field and weight live on different grids");
  }
  const int n = v.n();
  const auto& root = v.power(1.0 / p);
  const std::size_t cells = f.cells();
  std::vector<double> terms(cells);
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < static_cast<std::int64_t>(cells); ++c) {
    terms[c] = std::pow(apply_norm(root.data() + c * n * n, f.cell(c).data(), n), p);
  }
  return std::pow(deterministic_sum(terms) * f.grid().cell_measure(), 1.0 / p);
}

}  // namespace mwsq
