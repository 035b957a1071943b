#include "mwsq/reference.hpp"

#include <algorithm>
#include <cmath>

#include "mwsq/spd.hpp"

namespace mwsq::reference {
namespace {

Eigen::MatrixXd cell_matrix(const MatrixWeightField& w, std::uint64_t x) {
  const int n = w.n();
  Eigen::MatrixXd m(n, n);
  const auto v = w.base().cell(x);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = v[i * n + j];
  return m;
}

Eigen::MatrixXd fresh_power(const MatrixWeightField& w, std::uint64_t x, double t) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cell_matrix(w, x));
  return es.eigenvectors() * es.eigenvalues().array().pow(t).matrix().asDiagonal() * es.eigenvectors().transpose();
}

Eigen::VectorXd cell_vector(const CellField& f, std::uint64_t x) {
  const auto v = f.cell(x);
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

HaarCoefficients haar_transform(const CellField& f) {
  const GridSpec& g = f.grid();
  const std::size_t w = f.arity();
  HaarCoefficients out(g, w);
  for (std::uint64_t id = 0; id < out.haar_cubes(); ++id) {
    const DyadicCube cube = cube_from_id(g, id);
    const auto range = cell_range(g, cube);
    for (int sig = 1; sig < g.children_per_cube(); ++sig) {
      auto c = out.at(id, sig);
      for (std::uint64_t x = range.begin; x < range.end; ++x) {
        const double h = haar_value(g, {cube, sig}, cell_cube(g, x)) * g.cell_measure();
        for (std::size_t k = 0; k < w; ++k) c[k] += f.cell(x)[k] * h;
      }
    }
  }
  auto top = out.top_average();
  for (std::uint64_t x = 0; x < g.cells(); ++x)
    for (std::size_t k = 0; k < w; ++k) top[k] += f.cell(x)[k] * g.cell_measure();
  return out;
}

CellField square_function(const MatrixWeightField& u, double p, const CellField& f) {
  const GridSpec& g = f.grid();
  const auto coeffs = reference::haar_transform(f);
  CellField out(GridSpec(g.dimension(), g.depth(), u.n()), FieldKind::scalar);
  for (std::uint64_t x = 0; x < g.cells(); ++x) {
    const Eigen::MatrixXd a = fresh_power(u, x, 1.0 / p);
    double s = 0.0;
    for (int l = 0; l < g.depth(); ++l) {
      const DyadicCube cube{l, cell_ancestor(g, x, l)};
      const std::uint64_t id = cube_id(g, cube);
      for (int sig = 1; sig < g.children_per_cube(); ++sig) {
        const auto c = coeffs.at(id, sig);
        const Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size()));
        s += (a * v).squaredNorm() / measure(cube, g.dimension());
      }
    }
    out.cell(x)[0] = std::sqrt(s);
  }
  return out;
}

double ap_characteristic(const MatrixWeightField& u, const MatrixWeightField& v, double p) {
  const GridSpec& g = u.grid();
  const double pp = p / (p - 1.0);
  std::vector<Eigen::MatrixXd> a(g.cells()), b(g.cells());
  for (std::uint64_t x = 0; x < g.cells(); ++x) {
    a[x] = fresh_power(u, x, 1.0 / p);
    b[x] = fresh_power(v, x, -1.0 / p);
  }
  double best = 0.0;
  for (std::uint64_t id = 0; id < g.total_cubes(); ++id) {
    const auto range = cell_range(g, cube_from_id(g, id));
    const double size = static_cast<double>(range.size());
    double outer = 0.0;
    for (std::uint64_t x = range.begin; x < range.end; ++x) {
      double inner = 0.0;
      for (std::uint64_t y = range.begin; y < range.end; ++y) inner += std::pow(operator_norm(b[y] * a[x]), pp);
      outer += std::pow(inner / size, p / pp);
    }
    best = std::max(best, outer / size);
  }
  return best;
}

double a_infty_fujii_wilson(const CellField& w) {
  const GridSpec& g = w.grid();
  double best = 0.0;
  for (std::uint64_t id = 0; id < g.total_cubes(); ++id) {
    const DyadicCube cube = cube_from_id(g, id);
    const auto range = cell_range(g, cube);
    double mass = 0.0, maximal = 0.0;
    for (std::uint64_t x = range.begin; x < range.end; ++x) {
      mass += w.cell(x)[0];
      double m = 0.0;
      for (int l = cube.level; l <= g.depth(); ++l) {
        const auto sub = cell_range(g, {l, cell_ancestor(g, x, l)});
        double s = 0.0;
        for (std::uint64_t y = sub.begin; y < sub.end; ++y) s += w.cell(y)[0];
        m = std::max(m, s / static_cast<double>(sub.size()));
      }
      maximal += m;
    }
    best = std::max(best, maximal / mass);
  }
  return best;
}

CellField sparse_operator(const MatrixWeightField& u, double p, double r, const SparseFamily& family,
                          const CellField& f, const ReducingMatrices& reducing) {
  const GridSpec& g = f.grid();
  CellField out(GridSpec(g.dimension(), g.depth(), u.n()), FieldKind::scalar);
  std::vector<double> avg(family.size());
  for (std::size_t i = 0; i < family.size(); ++i) {
    const auto& cube = family.members()[i].cube;
    const Eigen::MatrixXd rl = reducing.matrix_of(cube);
    const auto range = cell_range(g, cube);
    double s = 0.0;
    for (std::uint64_t x = range.begin; x < range.end; ++x) s += (rl * cell_vector(f, x)).norm();
    avg[i] = s / static_cast<double>(range.size());
  }
  for (std::uint64_t x = 0; x < g.cells(); ++x) {
    const Eigen::MatrixXd a = fresh_power(u, x, 1.0 / p);
    double s = 0.0;
    for (std::size_t i = 0; i < family.size(); ++i) {
      const auto& cube = family.members()[i].cube;
      if (!contains(cube, cell_cube(g, x), g.dimension())) continue;
      const double norm = operator_norm(a * reducing.matrix_of(cube).inverse());
      s += std::pow(avg[i] * norm, r);
    }
    out.cell(x)[0] = std::pow(s, 1.0 / r);
  }
  return out;
}

double carleson_star_norm(const CoefficientField& a, double p, double r) {
  const GridSpec& g = a.grid();
  double best = 0.0;
  for (std::uint64_t jid = 0; jid < g.total_cubes(); ++jid) {
    const DyadicCube j = cube_from_id(g, jid);
    const auto range = cell_range(g, j);
    double total = 0.0;
    for (std::uint64_t x = range.begin; x < range.end; ++x) {
      double s = 0.0;
      for (const auto& [id, values] : a.entries()) {
        const DyadicCube l = cube_from_id(g, id);
        if (!contains(j, l, g.dimension()) || !contains(l, cell_cube(g, x), g.dimension())) continue;
        s += values[x - cell_range(g, l).begin];
      }
      total += std::pow(s, p / r);
    }
    best = std::max(best, total / static_cast<double>(range.size()));
  }
  return best;
}

std::vector<Eigen::MatrixXd> reducing_matrices(const MatrixWeightField& w, double p, ReducingKind kind,
                                               const ReducingOptions& options) {
  const GridSpec& g = w.grid();
  std::vector<Eigen::MatrixXd> out;
  out.reserve(g.total_cubes());
  for (std::uint64_t id = 0; id < g.total_cubes(); ++id) {
    out.push_back(fit_reducing_matrix(w, cube_from_id(g, id), p, kind, options).matrix);
  }
  return out;
}

}  // namespace mwsq::reference

namespace mwsq::reference {
namespace {

std::vector<DyadicCube> strict_subcubes(const GridSpec& g, const DyadicCube& j) {
  std::vector<DyadicCube> out;
  for (std::uint64_t id = 0; id < g.total_cubes(); ++id) {
    const DyadicCube c = cube_from_id(g, id);
    if (c.level > j.level && contains(j, c, g.dimension())) out.push_back(c);
  }
  return out;
}

std::vector<DyadicCube> maximal(const GridSpec& g, const std::vector<DyadicCube>& hits) {
  std::vector<DyadicCube> out;
  for (const auto& c : hits) {
    bool covered = false;
    for (const auto& o : hits) covered = covered || (o.level < c.level && contains(o, c, g.dimension()));
    if (!covered) out.push_back(c);
  }
  return out;
}

double reduced_mean(const StoppingContext& ctx, const DyadicCube& cube, const Eigen::MatrixXd& r) {
  const auto range = cell_range(ctx.grid(), cube);
  double s = 0.0;
  for (std::uint64_t x = range.begin; x < range.end; ++x) s += (r * cell_vector(ctx.f(), x)).norm();
  return s / static_cast<double>(range.size());
}

}  // namespace

std::vector<DyadicCube> stopping_children_sq(const StoppingContext& ctx, const DyadicCube& j, double lambda) {
  const GridSpec& g = ctx.grid();
  const Eigen::MatrixXd r = ctx.reducing().matrix_of(j);
  const double avg = reduced_mean(ctx, j, r);
  if (!(avg > 0.0)) return {};
  const auto coeffs = reference::haar_transform(ctx.f());
  std::vector<DyadicCube> hits;
  for (const auto& l : strict_subcubes(g, j)) {
    double s = 0.0;
    for (int level = j.level; level <= l.level && level < g.depth(); ++level) {
      const DyadicCube i = ancestor_at(l, g.dimension(), level);
      for (int sig = 1; sig < g.children_per_cube(); ++sig) {
        const auto c = coeffs.at(cube_id(g, i), sig);
        const Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size()));
        s += (r * v).squaredNorm() / measure(i, g.dimension());
      }
    }
    if (s > lambda * avg * avg) hits.push_back(l);
  }
  return maximal(g, hits);
}

std::vector<DyadicCube> corona_children(const StoppingContext& ctx, const DyadicCube& j, double lambda) {
  const GridSpec& g = ctx.grid();
  const Eigen::MatrixXd r = ctx.reducing().matrix_of(j);
  const Eigen::MatrixXd r_inv = r.inverse();
  const double avg = reduced_mean(ctx, j, r);
  std::vector<DyadicCube> hits;
  for (const auto& l : strict_subcubes(g, j)) {
    const bool average_jump = reduced_mean(ctx, l, r) > lambda * avg;
    const bool matrix_jump = operator_norm(ctx.reducing().matrix_of(l) * r_inv) > lambda;
    if (average_jump || matrix_jump) hits.push_back(l);
  }
  return maximal(g, hits);
}

}  // namespace mwsq::reference
