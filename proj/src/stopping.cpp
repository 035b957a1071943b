#include "mwsq/stopping.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "mwsq/errors.hpp"
#include "mwsq/spd.hpp"

namespace mwsq {

void StoppingConfig::validate() const {
  if (!(lambda > 1.0) || !std::isfinite(lambda)) throw InputError("lambda must be a finite number > 1");
  if (!(escalation_factor > 1.0)) throw InputError("escalation factor must exceed 1");
  if (max_escalations < 0) throw InputError("max escalations must be nonnegative");
}

StoppingContext::StoppingContext(const MatrixWeightField& u, double p, CellField f, const ReducingOptions& options)
    : StoppingContext(u, p, std::move(f), std::make_shared<const ReducingMatrices>(u, p, ReducingKind::forward, options)) {}

StoppingContext::StoppingContext(const MatrixWeightField& u, double p, CellField f,
                                 std::shared_ptr<const ReducingMatrices> reducing)
    : u_(&u), p_(p), f_(std::move(f)), coeffs_(haar_transform(f_)), reducing_(std::move(reducing)) {
  if (!reducing_ || !reducing_->grid().same_shape(u.grid()) || reducing_->p() != p ||
      reducing_->kind() != ReducingKind::forward) {
    throw InputError("reducing matrices do not match the weight and exponent");
  }
  if (!u.grid().same_shape(f_.grid())) throw InputError("field and weight live on different grids");
  if (f_.kind() != FieldKind::vector || f_.arity() != static_cast<std::size_t>(u.n())) {
    throw InputError("stopping times need a vector field of the weight's dimension");
  }
  const GridSpec& g = f_.grid();
  const int n = u.n();
  own_averages_.assign(g.total_cubes(), 0.0);
  const auto total = static_cast<std::int64_t>(g.total_cubes());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t id = 0; id < total; ++id) {
    const auto range = cell_range(g, cube_from_id(g, static_cast<std::uint64_t>(id)));
    const double* r = reducing_->matrix(static_cast<std::uint64_t>(id));
    double s = 0.0;
    for (std::uint64_t x = range.begin; x < range.end; ++x) s += apply_norm(r, f_.cell(x).data(), n);
    own_averages_[id] = s / static_cast<double>(range.size());
  }
}

std::vector<std::vector<double>> StoppingContext::subcube_averages(const DyadicCube& j, const double* a) const {
  const GridSpec& g = grid();
  const int n = u_->n();
  const int d = g.dimension();
  const int levels = g.depth() - j.level;
  const auto range = cell_range(g, j);
  std::vector<std::vector<double>> sums(levels + 1);
  sums[levels].resize(range.size());
  for (std::uint64_t x = range.begin; x < range.end; ++x) {
    sums[levels][x - range.begin] = apply_norm(a, f_.cell(x).data(), n);
  }
  for (int k = levels - 1; k >= 0; --k) {
    sums[k].assign(sums[k + 1].size() >> d, 0.0);
    for (std::size_t c = 0; c < sums[k + 1].size(); ++c) sums[k][c >> d] += sums[k + 1][c];
  }
  for (int k = 0; k <= levels; ++k) {
    const double cells = std::ldexp(1.0, (levels - k) * d);
    for (double& s : sums[k]) s /= cells;
  }
  return sums;
}

namespace {

/// Σ_{J ⊇ I ⊇ L} |r f_I|²/|I| for every L ⊆ J, by relative level and Morton index.
std::vector<std::vector<double>> running_sums(const StoppingContext& ctx, const DyadicCube& j, const double* r) {
  const GridSpec& g = ctx.grid();
  const int n = g.vector_dim();
  const int d = g.dimension();
  const auto& coeffs = ctx.coefficients();
  const int levels = g.depth() - j.level;
  std::vector<double> rc(n);
  auto term = [&](int level, std::uint64_t morton) {
    if (level >= g.depth()) return 0.0;
    const std::uint64_t id = g.level_offset(level) + morton;
    double s = 0.0;
    for (int sig = 1; sig < g.children_per_cube(); ++sig) {
      const auto c = coeffs.at(id, sig);
      for (int i = 0; i < n; ++i) {
        double v = 0.0;
        for (int k = 0; k < n; ++k) v += r[i * n + k] * c[k];
        s += v * v;
      }
    }
    return s * std::ldexp(1.0, level * d);
  };
  std::vector<std::vector<double>> run(levels + 1);
  run[0] = {term(j.level, j.morton)};
  for (int k = 1; k <= levels; ++k) {
    const std::uint64_t count = std::uint64_t{1} << (k * d);
    const std::uint64_t first = j.morton << (k * d);
    run[k].resize(count);
    for (std::uint64_t c = 0; c < count; ++c) run[k][c] = run[k - 1][c >> d] + term(j.level + k, first + c);
  }
  return run;
}

/// Deepest member level containing each cell, -1 when uncovered.
std::vector<int> deepest_member(const SparseFamily& family) {
  const GridSpec& g = family.grid();
  std::vector<int> deepest(g.cells(), -1);
  for (const auto& m : family.members()) {
    const auto range = cell_range(g, m.cube);
    for (std::uint64_t x = range.begin; x < range.end; ++x) deepest[x] = std::max(deepest[x], m.cube.level);
  }
  return deepest;
}

}  // namespace

std::vector<DyadicCube> stopping_children_sq(const StoppingContext& ctx, const DyadicCube& j, double lambda) {
  const GridSpec& g = ctx.grid();
  const int d = g.dimension();
  const std::uint64_t jid = cube_id(g, j);
  const double avg = ctx.own_averages()[jid];
  if (!(avg > 0.0)) return {};
  const double threshold = lambda * avg * avg;
  const auto run = running_sums(ctx, j, ctx.reducing().matrix(jid));
  std::vector<DyadicCube> out;
  std::vector<char> dead{0};
  for (std::size_t k = 1; k < run.size(); ++k) {
    std::vector<char> next(run[k].size(), 0);
    const std::uint64_t first = j.morton << (k * d);
    for (std::uint64_t c = 0; c < run[k].size(); ++c) {
      if (dead[c >> d]) {
        next[c] = 1;
      } else if (run[k][c] > threshold) {
        out.push_back({j.level + static_cast<int>(k), first + c});
        next[c] = 1;
      }
    }
    dead = std::move(next);
  }
  return out;
}

SparseFamily build_sparse_family(const StoppingContext& ctx, double lambda) {
  StoppingConfig{lambda}.validate();
  const GridSpec& g = ctx.grid();
  SparseFamily family(g);
  if (!(ctx.own_averages()[0] > 0.0)) return family;
  family.add(top_cube(), 0);
  std::vector<DyadicCube> frontier{top_cube()};
  for (int gen = 1; !frontier.empty(); ++gen) {
    std::vector<std::vector<DyadicCube>> kids(frontier.size());
    const auto count = static_cast<std::int64_t>(frontier.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t i = 0; i < count; ++i) kids[i] = stopping_children_sq(ctx, frontier[i], lambda);
    std::vector<DyadicCube> next;
    for (std::size_t i = 0; i < frontier.size(); ++i) {
      for (const auto& c : kids[i]) {
        if (family.add(c, gen, frontier[i])) next.push_back(c);
      }
    }
    frontier = std::move(next);
  }
  return family;
}

SparseCheck verify_sparse(const SparseFamily& family) {
  const GridSpec& g = family.grid();
  const auto deepest = deepest_member(family);
  SparseCheck out;
  for (const auto& m : family.members()) {
    const auto range = cell_range(g, m.cube);
    std::uint64_t covered = 0;
    for (std::uint64_t x = range.begin; x < range.end; ++x) covered += deepest[x] > m.cube.level ? 1 : 0;
    const double ratio = static_cast<double>(covered) / static_cast<double>(range.size());
    if (2 * covered > range.size()) out.sparse = false;
    if (ratio > out.worst_ratio) {
      out.worst_ratio = ratio;
      out.worst_cube = m.cube;
    }
  }
  return out;
}

RatioCheck verify_pointwise_domination(const StoppingContext& ctx, const SparseFamily& family) {
  const auto s = square_function(ctx.weight(), ctx.p(), ctx.coefficients());
  const auto sparse = sparse_positive_operator(ctx.weight(), ctx.p(), family, ctx.f(), ctx.reducing());
  return pointwise_ratio(s, sparse);
}

DisjointSets disjoint_sets(const SparseFamily& family) {
  const GridSpec& g = family.grid();
  const auto deepest = deepest_member(family);
  DisjointSets out;
  out.cells.resize(family.size());
  std::vector<int> occurrences(g.cells(), 0);
  for (std::size_t i = 0; i < family.size(); ++i) {
    const auto& cube = family.members()[i].cube;
    const auto range = cell_range(g, cube);
    for (std::uint64_t x = range.begin; x < range.end; ++x) {
      if (deepest[x] == cube.level) {
        out.cells[i].push_back(x);
        ++occurrences[x];
      }
    }
    const double e = static_cast<double>(out.cells[i].size());
    const double ratio = static_cast<double>(range.size()) / e;
    out.worst_ratio = std::max(out.worst_ratio, ratio);
    if (range.size() > 2 * out.cells[i].size()) out.measure_bound = false;
  }
  out.disjoint = std::all_of(occurrences.begin(), occurrences.end(), [](int c) { return c <= 1; });
  return out;
}

WeakTypeStep weak_type_step(const StoppingContext& ctx, const SparseFamily& family, double lambda) {
  const GridSpec& g = ctx.grid();
  const int n = g.vector_dim();
  const int d = g.dimension();
  std::map<std::uint64_t, std::vector<DyadicCube>> children;
  for (const auto& m : family.members()) {
    if (m.parent) children[cube_id(g, *m.parent)].push_back(m.cube);
  }
  WeakTypeStep out;
  const double root_lambda = std::sqrt(lambda);
  for (const auto& m : family.members()) {
    const std::uint64_t jid = cube_id(g, m.cube);
    const double avg = ctx.own_averages()[jid];
    if (!(avg > 0.0)) continue;
    const double* r = ctx.reducing().matrix(jid);
    const auto range = cell_range(g, m.cube);
    const double measure_j = std::ldexp(1.0, -m.cube.level * d);

    // Terms of cubes strictly above J are constant on J.
    std::vector<double> integral(n, 0.0);
    for (std::uint64_t x = range.begin; x < range.end; ++x) {
      const auto v = ctx.f().cell(x);
      for (int i = 0; i < n; ++i) integral[i] += v[i];
    }
    for (double& v : integral) v *= g.cell_measure();
    double rv_sq = 0.0;
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += r[i * n + k] * integral[k];
      rv_sq += s * s;
    }
    double above = 0.0;
    for (int l = 0; l < m.cube.level; ++l) {
      const double inv = std::ldexp(1.0, l * d);
      above += g.signatures() * rv_sq * inv * inv;
    }

    const auto run = running_sums(ctx, m.cube, r);
    const auto& finest = run.back();
    const double threshold = lambda * avg * avg;
    std::uint64_t count = 0;
    for (double s : finest) count += above + s >= threshold ? 1 : 0;
    out.constant = std::max(out.constant, root_lambda * static_cast<double>(count) / static_cast<double>(range.size()));

    auto it = children.find(jid);
    if (it == children.end()) continue;
    double packed = 0.0;
    for (const auto& c : it->second) {
      packed += measure(c, d);
      const auto sub = cell_range(g, c);
      for (std::uint64_t x = sub.begin; x < sub.end; ++x) {
        if (above + finest[x - range.begin] < threshold) out.inclusion = false;
      }
    }
    out.packing = std::max(out.packing, packed / measure_j);
  }
  return out;
}

}  // namespace mwsq
