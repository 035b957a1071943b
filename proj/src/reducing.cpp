#include "mwsq/reducing.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include "mwsq/errors.hpp"
#include "mwsq/haar.hpp"
#include "mwsq/mvee.hpp"

namespace mwsq {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Exponent s of the integrand |P e|^s and the power t with P = W^t.
struct Integrand {
  double s;
  double t;
};

Integrand integrand(double p, ReducingKind kind) {
  if (!(p > 1.0)) throw InputError("reducing matrices need p > 1");
  if (kind == ReducingKind::forward) return {p, 1.0 / p};
  return {p / (p - 1.0), -1.0 / p};
}

bool closed_form(int n, double p, const ReducingOptions& o) { return !o.force_mvee && (n == 1 || p == 2.0); }

int direction_count(int n, const ReducingOptions& o) {
  return o.directions > 0 ? std::max(o.directions, n) : default_direction_count(n);
}

/// Symmetric power of a symmetric PD matrix given row-major.
Eigen::MatrixXd sym_power(const Eigen::MatrixXd& m, double t) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
  if (!(es.eigenvalues().minCoeff() > 0.0)) throw DefinitenessError("degenerate reducing matrix");
  const Eigen::VectorXd lam = es.eigenvalues().array().pow(t);
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

ReducingFit fit_from_rho(const Eigen::MatrixXd& dirs, const Eigen::VectorXd& rho, const ReducingOptions& o) {
  Eigen::MatrixXd points(dirs.rows(), dirs.cols());
  for (Eigen::Index j = 0; j < dirs.cols(); ++j) {
    if (!(rho(j) > 0.0) || !std::isfinite(rho(j))) throw DefinitenessError("degenerate weight: zero directional norm");
    points.col(j) = dirs.col(j) / rho(j);
  }
  const MveeResult e = centered_mvee(points, o.tolerance, o.max_iterations);
  ReducingFit fit;
  fit.matrix = sym_power(e.shape, 0.5);
  fit.upper_factor = std::sqrt(e.inner_sq);
  fit.iterations = e.iterations;
  return fit;
}

}  // namespace

double directional_average_norm(const MatrixWeightField& w, const DyadicCube& cube, double p,
                                std::span<const double> e, ReducingKind kind) {
  const auto [s, t] = integrand(p, kind);
  const int n = w.n();
  if (static_cast<int>(e.size()) != n) throw InputError("direction has the wrong dimension");
  const auto& pw = w.power(t);
  const auto range = cell_range(w.grid(), cube);
  double acc = 0.0;
  for (std::uint64_t c = range.begin; c < range.end; ++c) {
    acc += std::pow(apply_norm(pw.data() + c * n * n, e.data(), n), s);
  }
  return std::pow(acc / static_cast<double>(range.size()), 1.0 / s);
}

ReducingFit fit_reducing_matrix(const MatrixWeightField& w, const DyadicCube& cube, double p, ReducingKind kind,
                                const ReducingOptions& o) {
  const auto [s, t] = integrand(p, kind);
  const int n = w.n();
  const auto range = cell_range(w.grid(), cube);
  if (closed_form(n, p, o)) {
    const auto& pw = w.power(t * s);
    Eigen::MatrixXd avg = Eigen::MatrixXd::Zero(n, n);
    for (std::uint64_t c = range.begin; c < range.end; ++c) avg += Eigen::Map<const RowMat>(pw.data() + c * n * n, n, n);
    avg /= static_cast<double>(range.size());
    ReducingFit fit;
    fit.matrix = sym_power(avg, 1.0 / s);
    fit.closed_form = true;
    return fit;
  }
  const Eigen::MatrixXd dirs = sphere_directions(n, direction_count(n, o));
  Eigen::VectorXd rho(dirs.cols());
  for (Eigen::Index j = 0; j < dirs.cols(); ++j) {
    rho(j) = directional_average_norm(w, cube, p, {dirs.col(j).data(), static_cast<std::size_t>(n)}, kind);
  }
  return fit_from_rho(dirs, rho, o);
}

SpdMatrix reducing_matrix(const MatrixWeightField& w, const DyadicCube& cube, double p, const ReducingOptions& o) {
  return SpdMatrix(fit_reducing_matrix(w, cube, p, ReducingKind::forward, o).matrix, 0.0);
}

SpdMatrix dual_reducing_matrix(const MatrixWeightField& w, const DyadicCube& cube, double p,
                               const ReducingOptions& o) {
  return SpdMatrix(fit_reducing_matrix(w, cube, p, ReducingKind::dual, o).matrix, 0.0);
}

ReducingPair reducing_pair(const MatrixWeightField& u, const MatrixWeightField& v, const DyadicCube& cube, double p,
                           const ReducingOptions& o) {
  return {cube, p, reducing_matrix(u, cube, p, o), dual_reducing_matrix(v, cube, p, o)};
}

ReducingRatio reducing_ratio(const MatrixWeightField& w, const DyadicCube& cube, double p, ReducingKind kind,
                             const Eigen::MatrixXd& r, const Eigen::MatrixXd& directions) {
  ReducingRatio out{std::numeric_limits<double>::infinity(), 0.0};
  for (Eigen::Index j = 0; j < directions.cols(); ++j) {
    const Eigen::VectorXd e = directions.col(j).normalized();
    const double rho = directional_average_norm(w, cube, p, {e.data(), static_cast<std::size_t>(e.size())}, kind);
    const double ratio = rho / (r * e).norm();
    out.min_ratio = std::min(out.min_ratio, ratio);
    out.max_ratio = std::max(out.max_ratio, ratio);
  }
  return out;
}

ReducingMatrices::ReducingMatrices(const MatrixWeightField& w, double p, ReducingKind kind, const ReducingOptions& o)
    : grid_(w.grid()), n_(w.n()), p_(p), kind_(kind) {
  const auto [s, t] = integrand(p, kind);
  const int n = n_;
  const std::size_t nn = static_cast<std::size_t>(n) * n;
  const GridSpec& g = grid_;
  matrices_.resize(g.total_cubes() * nn);
  inverses_.resize(g.total_cubes() * nn);

  auto store = [&](std::uint64_t id, const Eigen::MatrixXd& r) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (r + r.transpose()));
    const Eigen::MatrixXd inv =
        es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        matrices_[id * nn + i * n + j] = r(i, j);
        inverses_[id * nn + i * n + j] = inv(i, j);
      }
    }
  };

  if (closed_form(n, p, o)) {
    const auto& pw = w.power(t * s);
    const CellField integrand_field(g, FieldKind::matrix, pw);
    const auto sums = cube_integrals(integrand_field);
    const auto total = static_cast<std::int64_t>(g.total_cubes());
#pragma omp parallel for schedule(static)
    for (std::int64_t id = 0; id < total; ++id) {
      const DyadicCube q = cube_from_id(g, static_cast<std::uint64_t>(id));
      const Eigen::MatrixXd avg = Eigen::Map<const RowMat>(sums.data() + id * nn, n, n) / measure(q, g.dimension());
      store(static_cast<std::uint64_t>(id), sym_power(avg, 1.0 / s));
    }
    return;
  }

  const Eigen::MatrixXd dirs = sphere_directions(n, direction_count(n, o));
  const auto m = static_cast<std::size_t>(dirs.cols());
  const auto& pw = w.power(t);

  // level[c * m + j] = ∫_Q |P e_j|^s for each cube Q at the current level.
  const auto cells = static_cast<std::int64_t>(g.cells());
  std::vector<double> level(static_cast<std::size_t>(cells) * m);
  const double cell_measure = g.cell_measure();
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < cells; ++c) {
    for (std::size_t j = 0; j < m; ++j) {
      level[c * m + j] = std::pow(apply_norm(pw.data() + c * nn, dirs.col(static_cast<Eigen::Index>(j)).data(), n), s) *
                         cell_measure;
    }
  }

  const int kids = g.children_per_cube();
  double worst = 1.0;
  long long iterations = 0;
  std::exception_ptr failure;
  for (int lev = g.depth(); lev >= 0; --lev) {
    if (lev < g.depth()) {
      std::vector<double> up(g.cubes_at(lev) * m);
      const auto count = static_cast<std::int64_t>(g.cubes_at(lev));
#pragma omp parallel for schedule(static)
      for (std::int64_t q = 0; q < count; ++q) {
        for (std::size_t j = 0; j < m; ++j) {
          double acc = 0.0;
          for (int k = 0; k < kids; ++k) acc += level[((q << g.dimension()) + k) * m + j];
          up[q * m + j] = acc;
        }
      }
      level = std::move(up);
    }
    const auto count = static_cast<std::int64_t>(g.cubes_at(lev));
    const double inv_measure = 1.0 / std::ldexp(1.0, -lev * g.dimension());
    const std::uint64_t base = g.level_offset(lev);
#pragma omp parallel for schedule(dynamic, 8) reduction(max : worst) reduction(+ : iterations)
    for (std::int64_t q = 0; q < count; ++q) {
      try {
        Eigen::VectorXd rho(static_cast<Eigen::Index>(m));
        for (std::size_t j = 0; j < m; ++j) rho(static_cast<Eigen::Index>(j)) = std::pow(level[q * m + j] * inv_measure, 1.0 / s);
        const ReducingFit fit = fit_from_rho(dirs, rho, o);
        store(base + static_cast<std::uint64_t>(q), fit.matrix);
        worst = std::max(worst, fit.upper_factor);
        iterations += fit.iterations;
      } catch (...) {
#pragma omp critical(reducing_failure)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  }
  worst_upper_factor_ = worst;
  total_iterations_ = iterations;
}

Eigen::MatrixXd ReducingMatrices::matrix_of(const DyadicCube& cube) const {
  return Eigen::Map<const RowMat>(matrix(cube_id(grid_, cube)), n_, n_);
}

}  // namespace mwsq
