#include "mwsq/generators.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "mwsq/errors.hpp"
#include "mwsq/haar.hpp"
#include "mwsq/norm_search.hpp"

namespace mwsq {

std::string to_string(WeightFamily family) {
  switch (family) {
    case WeightFamily::scalar_power: return "scalar-power";
    case WeightFamily::matrix_rotation_power: return "matrix-rotation-power";
    case WeightFamily::random_log_bounded: return "random-log-bounded";
    case WeightFamily::two_weight_pair: return "two-weight-pair";
  }
  return "?";
}

WeightFamily parse_weight_family(const std::string& text) {
  for (auto f : {WeightFamily::scalar_power, WeightFamily::matrix_rotation_power, WeightFamily::random_log_bounded,
                 WeightFamily::two_weight_pair}) {
    if (to_string(f) == text) return f;
  }
  throw InputError("unknown weight family '" + text + "'");
}

namespace {

double distance_to(const std::vector<double>& x, const std::vector<double>& center) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double c = center.empty() ? 0.0 : center[i];
    s += (x[i] - c) * (x[i] - c);
  }
  return std::sqrt(s);
}

std::string describe_cell(const GridSpec& g, std::uint64_t cell) {
  std::ostringstream os;
  os << "cell " << morton_to_lexicographic(g, cell) << " at (";
  const auto c = cell_center(g, cell);
  for (std::size_t i = 0; i < c.size(); ++i) os << (i ? ", " : "") << c[i];
  os << ")";
  return os.str();
}

void check_condition(const GridSpec& g, std::uint64_t cell, const Eigen::VectorXd& eigenvalues, double cap) {
  const double lo = eigenvalues.minCoeff();
  const double hi = eigenvalues.maxCoeff();
  if (!(lo > 0.0) || !std::isfinite(hi) || hi / lo > cap) {
    std::ostringstream os;
    os << "generated weight exceeds the condition cap " << cap << " at " << describe_cell(g, cell)
       << " (eigenvalues " << lo << " .. " << hi << ")";
    throw InputError(os.str());
  }
}

void store(CellField& field, std::uint64_t cell, const Eigen::MatrixXd& m) {
  auto out = field.cell(cell);
  const int n = static_cast<int>(m.rows());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out[i * n + j] = 0.5 * (m(i, j) + m(j, i));
}

Eigen::MatrixXd rotation(int n, double theta) {
  Eigen::MatrixXd r = Eigen::MatrixXd::Identity(n, n);
  for (int i = 0; i + 1 < n; ++i) {
    Eigen::MatrixXd giv = Eigen::MatrixXd::Identity(n, n);
    const double t = theta * (i + 1);
    giv(i, i) = std::cos(t);
    giv(i, i + 1) = -std::sin(t);
    giv(i + 1, i) = std::sin(t);
    giv(i + 1, i + 1) = std::cos(t);
    r = r * giv;
  }
  return r;
}

CellField power_field(const WeightFamilySpec& spec) {
  const GridSpec& g = spec.grid;
  const int n = g.vector_dim();
  const int d = g.dimension();
  if (!spec.center.empty() && static_cast<int>(spec.center.size()) != d) {
    throw InputError("center must have one coordinate per dimension");
  }
  std::vector<double> alpha = spec.alpha.empty() ? std::vector<double>{0.0} : spec.alpha;
  if (spec.kind == WeightFamily::scalar_power) alpha.assign(n, alpha.front());
  if (alpha.size() == 1) alpha.assign(n, alpha.front());
  if (static_cast<int>(alpha.size()) != n) throw InputError("alpha needs one exponent or one per dimension");
  CellField field(g, FieldKind::matrix);
  Eigen::VectorXd eig(n);
  for (std::uint64_t x = 0; x < g.cells(); ++x) {
    const auto c = cell_center(g, x);
    const double dist = distance_to(c, spec.center);
    for (int i = 0; i < n; ++i) eig(i) = std::pow(dist, alpha[i]);
    check_condition(g, x, eig, spec.condition_cap);
    if (spec.kind == WeightFamily::scalar_power || spec.rotation == 0.0) {
      store(field, x, eig.asDiagonal().toDenseMatrix());
      continue;
    }
    double sum = 0.0;
    for (double v : c) sum += v;
    const Eigen::MatrixXd r = rotation(n, spec.rotation * std::numbers::pi * sum / d);
    store(field, x, r * eig.asDiagonal() * r.transpose());
  }
  return field;
}

/// Symmetric multiscale field H = Σ_Q a·decay^ℓ(Q) · h-sign pattern · S_Q with ‖S_Q‖ = 1.
std::vector<double> log_field(const GridSpec& g, double amplitude, double decay, std::uint64_t seed) {
  const int n = g.vector_dim();
  const int nn = n * n;
  const int d = g.dimension();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<int> sig_dist(1, g.signatures());
  std::vector<double> per_cube(static_cast<std::size_t>(g.level_offset(g.depth())) * nn);
  std::vector<int> sigs(g.level_offset(g.depth()));
  for (std::uint64_t id = 0; id < sigs.size(); ++id) {
    Eigen::MatrixXd s(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j) s(i, j) = s(j, i) = normal(rng);
    const double norm = s.cwiseAbs().maxCoeff() > 0.0 ? Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(s, Eigen::EigenvaluesOnly)
                                                            .eigenvalues()
                                                            .cwiseAbs()
                                                            .maxCoeff()
                                                      : 1.0;
    const double scale = amplitude * std::pow(decay, cube_from_id(g, id).level) / norm;
    for (int k = 0; k < nn; ++k) per_cube[id * nn + k] = scale * s(k / n, k % n);
    sigs[id] = sig_dist(rng);
  }
  std::vector<double> h(g.cells() * nn, 0.0);
  for (std::uint64_t x = 0; x < g.cells(); ++x) {
    for (int l = 0; l < g.depth(); ++l) {
      const std::uint64_t id = g.level_offset(l) + cell_ancestor(g, x, l);
      const int code = static_cast<int>(cell_ancestor(g, x, l + 1) & ((1u << d) - 1));
      const int sign = haar_sign(sigs[id], code);
      for (int k = 0; k < nn; ++k) h[x * nn + k] += sign * per_cube[id * nn + k];
    }
  }
  return h;
}

CellField exp_field(const GridSpec& g, const std::vector<double>& h, double cap) {
  const int n = g.vector_dim();
  CellField field(g, FieldKind::matrix);
  for (std::uint64_t x = 0; x < g.cells(); ++x) {
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(
        h.data() + x * n * n, n, n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es{Eigen::MatrixXd(m)};
    const Eigen::VectorXd eig = es.eigenvalues().array().exp();
    check_condition(g, x, eig, cap);
    store(field, x, es.eigenvectors() * eig.asDiagonal() * es.eigenvectors().transpose());
  }
  return field;
}

}  // namespace

WeightPair generate_weight_pair(const WeightFamilySpec& spec) {
  const GridSpec& g = spec.grid;
  const WeightOptions options{kEigenFloorRel, false, spec.condition_cap};
  switch (spec.kind) {
    case WeightFamily::scalar_power:
    case WeightFamily::matrix_rotation_power: {
      MatrixWeightField u(power_field(spec), options);
      return {u, u};
    }
    case WeightFamily::random_log_bounded: {
      MatrixWeightField u(exp_field(g, log_field(g, spec.log_amplitude, spec.decay, spec.seed), spec.condition_cap),
                          options);
      return {u, u};
    }
    case WeightFamily::two_weight_pair: {
      auto h = log_field(g, spec.log_amplitude, spec.decay, spec.seed);
      MatrixWeightField u(exp_field(g, h, spec.condition_cap), options);
      const auto extra = log_field(g, 0.5 * spec.log_amplitude, spec.decay, derive_seed(spec.seed, 1));
      for (std::size_t k = 0; k < h.size(); ++k) h[k] += extra[k];
      MatrixWeightField v(exp_field(g, h, spec.condition_cap), options);
      return {u, v};
    }
  }
  throw InputError("unknown weight family");
}

MatrixWeightField generate_weight(const WeightFamilySpec& spec) { return generate_weight_pair(spec).u; }

CellField generate_function(const GridSpec& grid, std::uint64_t seed, int bumps) {
  const int n = grid.vector_dim();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  CellField f(grid, FieldKind::vector);
  for (double& v : f.values()) v = 0.1 * normal(rng);
  std::uniform_int_distribution<int> level_dist(0, grid.depth());
  for (int b = 0; b < bumps; ++b) {
    const int level = level_dist(rng);
    std::uniform_int_distribution<std::uint64_t> idx(0, grid.cubes_at(level) - 1);
    const DyadicCube cube{level, idx(rng)};
    std::vector<double> c(n);
    for (double& v : c) v = normal(rng);
    const auto range = cell_range(grid, cube);
    for (std::uint64_t x = range.begin; x < range.end; ++x)
      for (int i = 0; i < n; ++i) f.cell(x)[i] += c[i];
  }
  return f;
}

CellField generate_cascade(const GridSpec& grid, std::uint64_t seed, double intermittency) {
  if (!(intermittency >= 0.0) || !std::isfinite(intermittency)) throw InputError("cascade intermittency must be >= 0");
  const int n = grid.vector_dim();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  // Lognormal multipliers with unit mean, one per cube below the top.
  std::vector<double> mass(grid.total_cubes(), 1.0);
  for (int level = 1; level <= grid.depth(); ++level) {
    for (std::uint64_t k = 0; k < grid.cubes_at(level); ++k) {
      const DyadicCube cube{level, k};
      const double w = std::exp(intermittency * normal(rng) - 0.5 * intermittency * intermittency);
      mass[cube_id(grid, cube)] = mass[cube_id(grid, parent(cube, grid.dimension()))] * w;
    }
  }
  CellField f(grid, FieldKind::vector);
  for (std::uint64_t x = 0; x < grid.cells(); ++x) {
    const double m = mass[cube_id(grid, cell_cube(grid, x))];
    for (int i = 0; i < n; ++i) f.cell(x)[i] = m * normal(rng);
  }
  return f;
}

}  // namespace mwsq
