#include "mwsq/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "mwsq/errors.hpp"
#include "mwsq/norms.hpp"

namespace mwsq {
namespace {

void require_vector_on(const MatrixWeightField& u, const CellField& f) {
  if (!u.grid().same_shape(f.grid())) throw InputError("field and weight live on different grids");
  if (f.kind() == FieldKind::matrix || f.arity() != static_cast<std::size_t>(u.n())) {
    throw InputError("field arity does not match the weight dimension");
  }
}

/// Σ_{J ∋ x, J ⊆ restrict} (1/|J|) Σ_σ f_J^σ (f_J^σ)ᵀ, accumulated down the tree.
/// Returned per cube at levels 0 .. N-1 (width × width each).
std::vector<double> accumulated_grams(const HaarCoefficients& coeffs, std::optional<DyadicCube> restrict) {
  const GridSpec& g = coeffs.grid();
  const int w = static_cast<int>(coeffs.width());
  const int ww = w * w;
  const int d = g.dimension();
  std::vector<double> acc(static_cast<std::size_t>(coeffs.haar_cubes()) * ww, 0.0);
  for (int l = 0; l < g.depth(); ++l) {
    const auto count = static_cast<std::int64_t>(g.cubes_at(l));
    const std::uint64_t base = g.level_offset(l);
    const double inv_measure = std::ldexp(1.0, l * d);
#pragma omp parallel for schedule(static)
    for (std::int64_t q = 0; q < count; ++q) {
      double* out = acc.data() + (base + q) * ww;
      if (l > 0) {
        const double* up = acc.data() + (g.level_offset(l - 1) + (static_cast<std::uint64_t>(q) >> d)) * ww;
        std::copy(up, up + ww, out);
      }
      const DyadicCube cube{l, static_cast<std::uint64_t>(q)};
      if (restrict && !contains(*restrict, cube, d)) continue;
      for (int sig = 1; sig < g.children_per_cube(); ++sig) {
        const auto c = coeffs.at(base + q, sig);
        for (int a = 0; a < w; ++a)
          for (int b = 0; b < w; ++b) out[a * w + b] += c[a] * c[b] * inv_measure;
      }
    }
  }
  return acc;
}

CellField weighted_square(const MatrixWeightField& u, double p, const HaarCoefficients& coeffs,
                          std::optional<DyadicCube> restrict) {
  const GridSpec& g = coeffs.grid();
  const int n = u.n();
  if (static_cast<int>(coeffs.width()) != n) throw InputError("coefficient width does not match the weight");
  const GridSpec out_grid(g.dimension(), g.depth(), n);
  CellField out(out_grid, FieldKind::scalar);
  if (g.depth() == 0) return out;
  const auto acc = accumulated_grams(coeffs, restrict);
  const auto& sq = u.power(2.0 / p);
  const int nn = n * n;
  const std::uint64_t base = g.level_offset(g.depth() - 1);
  const auto cells = static_cast<std::int64_t>(g.cells());
  auto values = out.values();
#pragma omp parallel for schedule(static)
  for (std::int64_t x = 0; x < cells; ++x) {
    const double* a = acc.data() + (base + (static_cast<std::uint64_t>(x) >> g.dimension())) * nn;
    const double* m = sq.data() + x * nn;
    double s = 0.0;
    for (int k = 0; k < nn; ++k) s += m[k] * a[k];
    values[x] = std::sqrt(std::max(s, 0.0));
  }
  return out;
}

}  // namespace

CellField square_function(const MatrixWeightField& u, double p, const CellField& f) {
  require_vector_on(u, f);
  return weighted_square(u, p, haar_transform(f), std::nullopt);
}

CellField square_function(const MatrixWeightField& u, double p, const HaarCoefficients& coeffs) {
  return weighted_square(u, p, coeffs, std::nullopt);
}

CellField localized_square_function(const MatrixWeightField& u, double p, const CellField& f, const DyadicCube& j) {
  require_vector_on(u, f);
  return weighted_square(u, p, haar_transform(f), j);
}

CellField dyadic_square_function(const CellField& f) {
  const auto coeffs = haar_transform(f);
  const GridSpec& g = f.grid();
  const int w = static_cast<int>(f.arity());
  CellField out(g, FieldKind::scalar);
  if (g.depth() == 0) return out;
  const auto acc = accumulated_grams(coeffs, std::nullopt);
  const std::uint64_t base = g.level_offset(g.depth() - 1);
  auto values = out.values();
  for (std::uint64_t x = 0; x < g.cells(); ++x) {
    const double* a = acc.data() + (base + (x >> g.dimension())) * w * w;
    double s = 0.0;
    for (int k = 0; k < w; ++k) s += a[k * w + k];
    values[x] = std::sqrt(std::max(s, 0.0));
  }
  return out;
}

CellField dyadic_square_function_scalar(const CellField& f) {
  if (f.kind() != FieldKind::scalar) throw InputError("expected a scalar field");
  return dyadic_square_function(f);
}

CellField dyadic_maximal(const CellField& f) {
  const GridSpec& g = f.grid();
  std::vector<double> mags(f.cells());
  for (std::size_t c = 0; c < f.cells(); ++c) {
    double s = 0.0;
    for (double v : f.cell(c)) s += v * v;
    mags[c] = std::sqrt(s);
  }
  const CellField abs_f(g, FieldKind::scalar, mags);
  const auto sums = cube_integrals(abs_f);
  const int depth = g.depth();
  const int d = g.dimension();
  for (std::uint64_t x = 0; x < g.cells(); ++x) {
    for (int l = 0; l < depth; ++l) {
      const double avg = sums[g.level_offset(l) + (x >> ((depth - l) * d))] * std::ldexp(1.0, l * d);
      mags[x] = std::max(mags[x], avg);
    }
  }
  return CellField(g, FieldKind::scalar, std::move(mags));
}

std::vector<double> reduced_averages(const SparseFamily& family, const CellField& f, const ReducingMatrices& reducing) {
  const GridSpec& g = family.grid();
  const int n = reducing.n();
  std::vector<double> out(family.size());
  const auto count = static_cast<std::int64_t>(family.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::int64_t i = 0; i < count; ++i) {
    const DyadicCube& cube = family.members()[i].cube;
    const double* r = reducing.matrix(cube_id(g, cube));
    const auto range = cell_range(g, cube);
    double s = 0.0;
    for (std::uint64_t x = range.begin; x < range.end; ++x) s += apply_norm(r, f.cell(x).data(), n);
    out[i] = s / static_cast<double>(range.size());
  }
  return out;
}

CellField generalized_sparse_operator(const MatrixWeightField& u, double p, double r, const SparseFamily& family,
                                      const CellField& f, const ReducingMatrices& reducing) {
  require_vector_on(u, f);
  if (!(r > 0.0)) throw InputError("sparse operator exponent r must be positive");
  const GridSpec& g = family.grid();
  const int n = u.n();
  const int nn = n * n;
  const int depth = g.depth();
  const int d = g.dimension();
  const auto avgs = reduced_averages(family, f, reducing);
  const auto& root = u.power(1.0 / p);
  CellField out(GridSpec(g.dimension(), g.depth(), n), FieldKind::scalar);
  auto values = out.values();
  const auto cells = static_cast<std::int64_t>(g.cells());
#pragma omp parallel
  {
    std::vector<double> prod(nn);
#pragma omp for schedule(static)
    for (std::int64_t x = 0; x < cells; ++x) {
      double s = 0.0;
      for (int l = 0; l <= depth; ++l) {
        const std::uint64_t id = g.level_offset(l) + (static_cast<std::uint64_t>(x) >> ((depth - l) * d));
        const std::int64_t m = family.member_index(id);
        if (m < 0) continue;
        matmul(root.data() + x * nn, reducing.inverse(id), prod.data(), n);
        const double norm_sq = spectral_norm_sq(prod.data(), n);
        s += r == 2.0 ? avgs[m] * avgs[m] * norm_sq : std::pow(avgs[m] * std::sqrt(norm_sq), r);
      }
      values[x] = r == 2.0 ? std::sqrt(s) : std::pow(s, 1.0 / r);
    }
  }
  return out;
}

CellField sparse_positive_operator(const MatrixWeightField& u, double p, const SparseFamily& family,
                                   const CellField& f, const ReducingMatrices& reducing) {
  return generalized_sparse_operator(u, p, 2.0, family, f, reducing);
}

CellField sparse_positive_operator(const MatrixWeightField& u, double p, const SparseFamily& family,
                                   const CellField& f, const ReducingOptions& options) {
  const ReducingMatrices reducing(u, p, ReducingKind::forward, options);
  return sparse_positive_operator(u, p, family, f, reducing);
}

RatioCheck pointwise_ratio(const CellField& numerator, const CellField& denominator) {
  RatioCheck out;
  for (std::uint64_t x = 0; x < numerator.cells(); ++x) {
    const double a = numerator.values()[x];
    const double b = denominator.values()[x];
    double ratio;
    if (b == 0.0) {
      if (a == 0.0) {
        ++out.skipped;
        continue;
      }
      ratio = std::numeric_limits<double>::infinity();
    } else {
      ratio = a / b;
    }
    if (ratio > out.max_ratio) {
      out.max_ratio = ratio;
      out.argmax_cell = x;
    }
  }
  return out;
}

RatioCheck linear_sparse_domination_check(const MatrixWeightField& u, double p, const SparseFamily& family,
                                          const CellField& f, const ReducingMatrices& reducing) {
  require_vector_on(u, f);
  const GridSpec& g = family.grid();
  const int n = u.n();
  const int depth = g.depth();
  const int d = g.dimension();
  const auto& root = u.power(1.0 / p);
  std::vector<std::vector<double>> means;
  means.reserve(family.size());
  for (const auto& m : family.members()) means.push_back(average(f, m.cube));

  CellField lhs(GridSpec(g.dimension(), g.depth(), n), FieldKind::scalar);
  for (std::uint64_t x = 0; x < g.cells(); ++x) {
    double s = 0.0;
    for (int l = 0; l <= depth; ++l) {
      const std::int64_t m = family.member_index(g.level_offset(l) + (x >> ((depth - l) * d)));
      if (m >= 0) s += apply_norm(root.data() + x * n * n, means[m].data(), n);
    }
    lhs.values()[x] = s;
  }
  return pointwise_ratio(lhs, generalized_sparse_operator(u, p, 1.0, family, f, reducing));
}

void CoefficientField::set(const DyadicCube& cube, std::vector<double> values) {
  if (values.size() != cell_range(grid_, cube).size()) throw InputError("coefficient profile has the wrong size");
  for (double v : values) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InputError("coefficients must be finite and nonnegative");
  }
  entries_[cube_id(grid_, cube)] = std::move(values);
}

CoefficientField sparse_family_coefficients(const MatrixWeightField& u, double p, const SparseFamily& family,
                                            const ReducingMatrices& reducing) {
  const GridSpec& g = family.grid();
  const int n = u.n();
  const auto& root = u.power(1.0 / p);
  CoefficientField a(g);
  std::vector<double> prod(static_cast<std::size_t>(n) * n);
  for (const auto& m : family.members()) {
    const auto id = cube_id(g, m.cube);
    const auto range = cell_range(g, m.cube);
    std::vector<double> values(range.size());
    for (std::uint64_t x = range.begin; x < range.end; ++x) {
      matmul(root.data() + x * n * n, reducing.inverse(id), prod.data(), n);
      values[x - range.begin] = spectral_norm_sq(prod.data(), n);
    }
    a.set(m.cube, std::move(values));
  }
  return a;
}

CellField carleson_operator(const MatrixWeightField& u, double /*p*/, double r, const CoefficientField& a,
                            const CellField& f, const ReducingMatrices& reducing) {
  require_vector_on(u, f);
  if (!(r > 0.0)) throw InputError("Carleson operator exponent r must be positive");
  const GridSpec& g = a.grid();
  const int n = u.n();
  CellField out(GridSpec(g.dimension(), g.depth(), n), FieldKind::scalar);
  std::vector<double> sums(g.cells(), 0.0);
  for (const auto& [id, profile] : a.entries()) {
    const DyadicCube cube = cube_from_id(g, id);
    const auto range = cell_range(g, cube);
    const double* rm = reducing.matrix(id);
    double avg = 0.0;
    for (std::uint64_t x = range.begin; x < range.end; ++x) avg += apply_norm(rm, f.cell(x).data(), n);
    avg /= static_cast<double>(range.size());
    const double scale = std::pow(avg, r);
    for (std::uint64_t x = range.begin; x < range.end; ++x) sums[x] += profile[x - range.begin] * scale;
  }
  for (std::uint64_t x = 0; x < g.cells(); ++x) out.values()[x] = std::pow(sums[x], 1.0 / r);
  return out;
}

CubeSup carleson_star_norm(const CoefficientField& a, double p, double r) {
  const GridSpec& g = a.grid();
  const int depth = g.depth();
  const double expo = p / r;
  std::vector<double> running(g.cells(), 0.0);
  std::vector<double> per_cube(g.total_cubes(), 0.0);
  for (int l = depth; l >= 0; --l) {
    const std::uint64_t base = g.level_offset(l);
    for (std::uint64_t q = 0; q < g.cubes_at(l); ++q) {
      const auto range = cell_range(g, {l, q});
      if (const auto* profile = a.find(base + q)) {
        for (std::uint64_t x = range.begin; x < range.end; ++x) running[x] += (*profile)[x - range.begin];
      }
      double s = 0.0;
      for (std::uint64_t x = range.begin; x < range.end; ++x) s += std::pow(running[x], expo);
      per_cube[base + q] = s / static_cast<double>(range.size());
    }
  }
  CubeSup out{0.0, top_cube()};
  for (std::uint64_t id = 0; id < per_cube.size(); ++id) {
    if (per_cube[id] > out.value) {
      out.value = per_cube[id];
      out.argmax = cube_from_id(g, id);
    }
  }
  return out;
}

double carleson_sequence_norm(const GridSpec& g, std::span<const double> tau) {
  if (tau.size() != g.total_cubes()) throw InputError("sequence must have one entry per cube");
  std::vector<double> subtree(tau.begin(), tau.end());
  const int d = g.dimension();
  for (int l = g.depth() - 1; l >= 0; --l) {
    for (std::uint64_t q = 0; q < g.cubes_at(l); ++q) {
      for (int k = 0; k < g.children_per_cube(); ++k) {
        subtree[g.level_offset(l) + q] += subtree[g.level_offset(l + 1) + (q << d) + static_cast<std::uint64_t>(k)];
      }
    }
  }
  double best = 0.0;
  for (std::uint64_t id = 0; id < subtree.size(); ++id) {
    best = std::max(best, subtree[id] / measure(cube_from_id(g, id), d));
  }
  return best;
}

CarlesonSequenceCheck scalar_carleson_embedding_check(const GridSpec& g, std::span<const double> tau,
                                                      const CellField& f, double q) {
  if (!(q > 1.0)) throw InputError("Carleson embedding needs q > 1");
  for (double t : tau) {
    if (!(t >= 0.0)) throw InputError("Carleson sequence must be nonnegative");
  }
  std::vector<double> mags(f.cells());
  for (std::size_t c = 0; c < f.cells(); ++c) {
    double s = 0.0;
    for (double v : f.cell(c)) s += v * v;
    mags[c] = std::sqrt(s);
  }
  const auto sums = cube_integrals(CellField(GridSpec(g.dimension(), g.depth(), 1), FieldKind::scalar, mags));
  CarlesonSequenceCheck out;
  for (std::uint64_t id = 0; id < g.total_cubes(); ++id) {
    if (tau[id] == 0.0) continue;
    const double avg = sums[id] / measure(cube_from_id(g, id), g.dimension());
    out.lhs += tau[id] * std::pow(avg, q);
  }
  out.tau_norm = carleson_sequence_norm(g, tau);
  out.f_norm_q_pow = std::pow(lp_norm(f, q), q);
  out.delta = q - 1.0;
  const double rhs = out.tau_norm * out.f_norm_q_pow;
  out.constant = rhs > 0.0 ? out.lhs * out.delta / rhs : 0.0;
  return out;
}

}  // namespace mwsq
