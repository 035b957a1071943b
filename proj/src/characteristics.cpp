#include "mwsq/characteristics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "mwsq/errors.hpp"
#include "mwsq/haar.hpp"
#include "mwsq/mvee.hpp"

namespace mwsq {
namespace {

void require_same_grid(const MatrixWeightField& u, const MatrixWeightField& v) {
  if (!u.grid().same_shape(v.grid()) || u.n() != v.n()) throw InputError("weights live on different grids");
}

CubeSup sup_over_cubes(const GridSpec& g, const std::vector<double>& per_cube) {
  CubeSup out{-1.0, top_cube()};
  for (std::uint64_t id = 0; id < per_cube.size(); ++id) {
    if (per_cube[id] > out.value) {
      out.value = per_cube[id];
      out.argmax = cube_from_id(g, id);
    }
  }
  return out;
}

}  // namespace

CubeSup ap_characteristic(const MatrixWeightField& u, const MatrixWeightField& v, double p) {
  require_same_grid(u, v);
  if (!(p > 1.0)) throw InputError("A_p needs p > 1");
  const GridSpec& g = u.grid();
  const int n = u.n();
  const int nn = n * n;
  const int depth = g.depth();
  const int d = g.dimension();
  const double pp = p / (p - 1.0);
  const auto& a = u.power(1.0 / p);
  const auto& b = v.power(-1.0 / p);
  const auto cells = static_cast<std::int64_t>(g.cells());

  // inner[x * (N+1) + l] = (⨍_{Q_l(x)} ‖B(y)A(x)‖^{p'} dy)^{p/p'} for the level-l cube Q_l(x) ∋ x.
  std::vector<double> inner(static_cast<std::size_t>(cells) * (depth + 1));
#pragma omp parallel
  {
    std::vector<double> row(static_cast<std::size_t>(cells));
    double prod[64];
    std::vector<double> big;
    double* c = prod;
    if (nn > 64) {
      big.resize(nn);
      c = big.data();
    }
#pragma omp for schedule(dynamic, 16)
    for (std::int64_t x = 0; x < cells; ++x) {
      const double* ax = a.data() + x * nn;
      for (std::int64_t y = 0; y < cells; ++y) {
        matmul(b.data() + y * nn, ax, c, n);
        row[y] = std::pow(spectral_norm_sq(c, n), 0.5 * pp);
      }
      // Pairwise in-place reduction up the tree; after processing level l the
      // entries row[0 .. 2^{ld}) hold the level-l cube sums.
      std::int64_t count = cells;
      inner[x * (depth + 1) + depth] = std::pow(row[x], p / pp);
      for (int l = depth - 1; l >= 0; --l) {
        const std::int64_t next = count >> d;
        for (std::int64_t q = 0; q < next; ++q) {
          double s = 0.0;
          for (int k = 0; k < (1 << d); ++k) s += row[(q << d) + k];
          row[q] = s;
        }
        count = next;
        const std::int64_t q = x >> ((depth - l) * d);
        const double avg = row[q] / static_cast<double>(cells / count);
        inner[x * (depth + 1) + l] = std::pow(avg, p / pp);
      }
    }
  }

  std::vector<double> per_cube(g.total_cubes());
  for (int l = 0; l <= depth; ++l) {
    const auto count = static_cast<std::int64_t>(g.cubes_at(l));
    const std::uint64_t base = g.level_offset(l);
#pragma omp parallel for schedule(static)
    for (std::int64_t q = 0; q < count; ++q) {
      const auto range = cell_range(g, {l, static_cast<std::uint64_t>(q)});
      double s = 0.0;
      for (std::uint64_t x = range.begin; x < range.end; ++x) s += inner[x * (depth + 1) + l];
      per_cube[base + q] = s / static_cast<double>(range.size());
    }
  }
  return sup_over_cubes(g, per_cube);
}

CubeSup ap_characteristic_reduced(const MatrixWeightField& u, const MatrixWeightField& v, double p,
                                  const ReducingOptions& options) {
  require_same_grid(u, v);
  const ReducingMatrices fwd(u, p, ReducingKind::forward, options);
  const ReducingMatrices dual(v, p, ReducingKind::dual, options);
  const GridSpec& g = u.grid();
  const int n = u.n();
  std::vector<double> per_cube(g.total_cubes());
  std::vector<double> c(static_cast<std::size_t>(n) * n);
  for (std::uint64_t id = 0; id < g.total_cubes(); ++id) {
    matmul(fwd.matrix(id), dual.matrix(id), c.data(), n);
    per_cube[id] = std::pow(spectral_norm_sq(c.data(), n), 0.5 * p);
  }
  return sup_over_cubes(g, per_cube);
}

CubeSup a_infty_fujii_wilson(const CellField& w) {
  if (w.kind() != FieldKind::scalar) throw InputError("A_infty takes a scalar weight");
  for (double x : w.values()) {
    if (x < 0.0) throw DefinitenessError("A_infty weight must be nonnegative");
  }
  const GridSpec& g = w.grid();
  const int depth = g.depth();
  const int d = g.dimension();
  const auto integrals = cube_integrals(w);
  const auto cells = static_cast<std::int64_t>(g.cells());

  // running[x] = max over cubes Q with x ∈ Q and level(Q) ≥ l of ⨍_Q w.
  std::vector<double> running(w.values().begin(), w.values().end());
  std::vector<double> per_cube(g.total_cubes(), 0.0);
  for (int l = depth; l >= 0; --l) {
    const std::uint64_t base = g.level_offset(l);
    const double inv_measure = std::ldexp(1.0, l * d);
    if (l < depth) {
#pragma omp parallel for schedule(static)
      for (std::int64_t x = 0; x < cells; ++x) {
        const double avg = integrals[base + (static_cast<std::uint64_t>(x) >> ((depth - l) * d))] * inv_measure;
        running[x] = std::max(running[x], avg);
      }
    }
    const auto count = static_cast<std::int64_t>(g.cubes_at(l));
#pragma omp parallel for schedule(static)
    for (std::int64_t q = 0; q < count; ++q) {
      const auto range = cell_range(g, {l, static_cast<std::uint64_t>(q)});
      double s = 0.0;
      for (std::uint64_t x = range.begin; x < range.end; ++x) s += running[x];
      const double mass = integrals[base + q];
      per_cube[base + q] = mass > 0.0 ? s * g.cell_measure() / mass : 0.0;
    }
  }
  return sup_over_cubes(g, per_cube);
}

CellField directional_weight(const MatrixWeightField& u, double p, const Eigen::VectorXd& e) {
  const int n = u.n();
  const auto& root = u.power(1.0 / p);
  const GridSpec g(u.grid().dimension(), u.grid().depth(), n);
  std::vector<double> values(u.cells());
  for (std::size_t c = 0; c < u.cells(); ++c) values[c] = std::pow(apply_norm(root.data() + c * n * n, e.data(), n), p);
  return CellField(g, FieldKind::scalar, std::move(values));
}

ApwkResult apwk_characteristic(const MatrixWeightField& u, double p, const ApwkOptions& options) {
  const int n = u.n();
  const int count = n == 1 ? 1 : (options.directions > 0 ? std::max(options.directions, 2 * n * n)
                                                          : std::max(64, 2 * n * n));
  const Eigen::MatrixXd dirs = sphere_directions(n, count);
  std::vector<CubeSup> values(static_cast<std::size_t>(dirs.cols()));
  for (Eigen::Index j = 0; j < dirs.cols(); ++j) {
    values[j] = a_infty_fujii_wilson(directional_weight(u, p, dirs.col(j)));
  }
  ApwkResult out;
  out.directions_used = static_cast<int>(dirs.cols());
  Eigen::Index best = 0;
  for (Eigen::Index j = 1; j < dirs.cols(); ++j) {
    if (values[j].value > values[best].value) best = j;
  }
  out.sampled = values[best].value;
  out.value = out.sampled;
  out.argmax = values[best].argmax;
  out.direction = dirs.col(best);

  if (options.refine && n > 1) {
    std::mt19937_64 rng(0xa11ce5u);
    std::normal_distribution<double> normal;
    double step = 0.5 * std::acos(std::clamp(std::abs(dirs.col(0).dot(dirs.col(std::min<Eigen::Index>(1, dirs.cols() - 1)))), 0.0, 1.0));
    step = std::max(step, 0.05);
    for (int round = 0; round < options.refine_rounds; ++round) {
      Eigen::VectorXd t(n);
      for (int i = 0; i < n; ++i) t(i) = normal(rng);
      t -= t.dot(out.direction) * out.direction;
      if (t.norm() < 1e-12) continue;
      t.normalize();
      bool improved = false;
      for (double sign : {1.0, -1.0}) {
        const Eigen::VectorXd cand = (out.direction + sign * std::tan(step) * t).normalized();
        ++out.directions_used;
        const CubeSup c = a_infty_fujii_wilson(directional_weight(u, p, cand));
        if (c.value > out.value) {
          out.value = c.value;
          out.argmax = c.argmax;
          out.direction = cand;
          improved = true;
          break;
        }
      }
      if (!improved) step *= 0.7;
    }
  }
  return out;
}

double reverse_holder_constant(const CellField& w, double epsilon) {
  const GridSpec& g = w.grid();
  std::vector<double> powered(w.cells());
  for (std::size_t c = 0; c < w.cells(); ++c) powered[c] = std::pow(w.values()[c], 1.0 + epsilon);
  const auto plain = cube_integrals(w);
  const auto high = cube_integrals(CellField(g, FieldKind::scalar, std::move(powered)));
  double worst = 0.0;
  for (std::uint64_t id = 0; id < g.total_cubes(); ++id) {
    const double mu = measure(cube_from_id(g, id), g.dimension());
    const double avg = plain[id] / mu;
    if (!(avg > 0.0)) continue;
    worst = std::max(worst, std::pow(high[id] / mu, 1.0 / (1.0 + epsilon)) / avg);
  }
  return worst;
}

ReverseHolder reverse_holder_exponent(const CellField& w, int max_halvings) {
  ReverseHolder out;
  out.a_infty = a_infty_fujii_wilson(w).value;
  for (int k = 0; k <= max_halvings; ++k) {
    const double eps = std::ldexp(1.0, -k);
    const double c = reverse_holder_constant(w, eps);
    if (c <= 2.0) {
      out.epsilon = eps;
      out.constant = c;
      break;
    }
  }
  out.epsilon_times_a_infty = out.epsilon * out.a_infty;
  return out;
}

Characteristics compute_characteristics(const MatrixWeightField& u, const MatrixWeightField& v, double p,
                                        const ReducingOptions& reducing, const ApwkOptions& apwk) {
  Characteristics ch;
  ch.p = p;
  const auto ap = ap_characteristic(u, v, p);
  ch.ap = ap.value;
  ch.ap_argmax = ap.argmax;
  const auto red = ap_characteristic_reduced(u, v, p, reducing);
  ch.ap_reduced = red.value;
  ch.ap_reduced_argmax = red.argmax;

  const auto wk = apwk_characteristic(u, p, apwk);
  ch.apwk = wk.value;
  ch.apwk_sampled = wk.sampled;

  const double pp = p / (p - 1.0);
  const MatrixWeightField sigma(CellField(v.grid(), FieldKind::matrix, v.power(-pp / p)),
                                WeightOptions{0.0, false, std::numeric_limits<double>::infinity()});
  const auto dual = apwk_characteristic(sigma, pp, apwk);
  ch.apwk_dual = dual.value;
  ch.apwk_dual_sampled = dual.sampled;
  ch.directions_used = wk.directions_used + dual.directions_used;

  const auto rh = reverse_holder_exponent(directional_weight(sigma, pp, dual.direction));
  ch.rh_epsilon = rh.epsilon;
  ch.rh_epsilon_times_a_infty = rh.epsilon_times_a_infty;
  return ch;
}

}  // namespace mwsq
