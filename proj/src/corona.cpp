#include "mwsq/corona.hpp"

#include <cmath>
#include <limits>

#include "mwsq/spd.hpp"

namespace mwsq {

std::vector<DyadicCube> corona_children(const StoppingContext& ctx, const DyadicCube& j, double lambda) {
  const GridSpec& g = ctx.grid();
  const int n = g.vector_dim();
  const int d = g.dimension();
  const std::uint64_t jid = cube_id(g, j);
  const auto& reducing = ctx.reducing();
  const double* r_inv = reducing.inverse(jid);
  const double avg_j = ctx.own_averages()[jid];
  const auto sub = ctx.subcube_averages(j, reducing.matrix(jid));
  const double lambda_sq = lambda * lambda;
  std::vector<double> prod(n * n);
  std::vector<DyadicCube> out;
  std::vector<char> dead{0};
  for (std::size_t k = 1; k < sub.size(); ++k) {
    const int level = j.level + static_cast<int>(k);
    const std::uint64_t first = j.morton << (k * d);
    std::vector<char> next(sub[k].size(), 0);
    for (std::uint64_t c = 0; c < sub[k].size(); ++c) {
      if (dead[c >> d]) {
        next[c] = 1;
        continue;
      }
      bool stop = sub[k][c] > lambda * avg_j;
      if (!stop) {
        matmul(reducing.matrix(g.level_offset(level) + first + c), r_inv, prod.data(), n);
        stop = spectral_norm_sq(prod.data(), n) > lambda_sq;
      }
      if (stop) {
        out.push_back({level, first + c});
        next[c] = 1;
      }
    }
    dead = std::move(next);
  }
  return out;
}

CoronaDecomposition build_corona(const StoppingContext& ctx, double lambda) {
  StoppingConfig{lambda}.validate();
  const GridSpec& g = ctx.grid();
  const int d = g.dimension();
  CoronaDecomposition dec{g, lambda, {}, {}, {}};
  dec.stopping.push_back({top_cube(), 0, std::nullopt});
  std::size_t begin = 0;
  for (int gen = 1; begin < dec.stopping.size(); ++gen) {
    const std::size_t end = dec.stopping.size();
    dec.children.resize(end);
    const auto count = static_cast<std::int64_t>(end - begin);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t i = 0; i < count; ++i) {
      dec.children[begin + i] = corona_children(ctx, dec.stopping[begin + i].cube, lambda);
    }
    for (std::size_t i = begin; i < end; ++i) {
      for (const auto& c : dec.children[i]) dec.stopping.push_back({c, gen, dec.stopping[i].cube});
    }
    begin = end;
  }
  dec.children.resize(dec.stopping.size());

  dec.block.assign(g.total_cubes(), -1);
  std::vector<char> is_child(g.total_cubes(), 0);
  for (std::size_t s = 0; s < dec.stopping.size(); ++s) {
    for (const auto& c : dec.children[s]) is_child[cube_id(g, c)] = 1;
    const DyadicCube& j = dec.stopping[s].cube;
    std::vector<char> dead{0};
    dec.block[cube_id(g, j)] = static_cast<std::int64_t>(s);
    for (int k = 1; j.level + k <= g.depth(); ++k) {
      const int level = j.level + k;
      const std::uint64_t first = j.morton << (k * d);
      std::vector<char> next(std::size_t{1} << (k * d), 0);
      for (std::uint64_t c = 0; c < next.size(); ++c) {
        const std::uint64_t id = g.level_offset(level) + first + c;
        next[c] = dead[c >> d] || is_child[id];
        if (!next[c]) dec.block[id] = static_cast<std::int64_t>(s);
      }
      dead = std::move(next);
    }
    for (const auto& c : dec.children[s]) is_child[cube_id(g, c)] = 0;
  }
  return dec;
}

CoronaCheck verify_corona(const CoronaDecomposition& dec, const StoppingContext& ctx, double tolerance) {
  const GridSpec& g = dec.grid;
  const int d = g.dimension();
  CoronaCheck out;
  out.control_limit = dec.lambda * dec.lambda * reducing_constant(g.vector_dim(), tolerance);

  std::vector<std::int64_t> stop_index(g.total_cubes(), -1);
  std::vector<std::int64_t> child_of(g.total_cubes(), -1);
  for (std::size_t s = 0; s < dec.stopping.size(); ++s) {
    stop_index[cube_id(g, dec.stopping[s].cube)] = static_cast<std::int64_t>(s);
  }
  for (std::size_t s = 0; s < dec.stopping.size(); ++s) {
    const auto& j = dec.stopping[s].cube;
    std::uint64_t packed = 0;
    for (const auto& c : dec.children[s]) {
      child_of[cube_id(g, c)] = static_cast<std::int64_t>(s);
      packed += cell_range(g, c).size();
    }
    const std::uint64_t size = cell_range(g, j).size();
    const double ratio = static_cast<double>(packed) / static_cast<double>(size);
    if (4 * packed > size) out.packing = false;
    if (ratio > out.worst_packing) {
      out.worst_packing = ratio;
      out.worst_packing_cube = j;
    }
  }

  const auto& avg = ctx.own_averages();
  for (std::uint64_t id = 0; id < g.total_cubes(); ++id) {
    const DyadicCube q = cube_from_id(g, id);
    int owners = 0;
    std::int64_t owner = -1;
    for (int l = 0; l <= q.level; ++l) {
      const std::uint64_t aid = cube_id(g, ancestor_at(q, d, l));
      const std::int64_t s = stop_index[aid];
      if (s < 0) continue;
      bool inside_child = false;
      for (int m = l + 1; m <= q.level && !inside_child; ++m) {
        inside_child = child_of[cube_id(g, ancestor_at(q, d, m))] == s;
      }
      if (!inside_child) {
        ++owners;
        owner = s;
      }
    }
    if (owners != 1 || dec.block[id] != owner) {
      ++out.partition_violations;
      continue;
    }
    const double denom = avg[cube_id(g, dec.stopping[owner].cube)];
    const double num = avg[id];
    if (!(denom > 0.0)) {
      if (num > 0.0) {
        out.worst_control = std::numeric_limits<double>::infinity();
      } else {
        ++out.skipped;
      }
      continue;
    }
    out.worst_control = std::max(out.worst_control, num / denom);
  }
  out.partition = out.partition_violations == 0;
  out.control = out.worst_control <= out.control_limit;
  return out;
}

}  // namespace mwsq
