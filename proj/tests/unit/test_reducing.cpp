#include <cmath>
#include <random>

#include "doctest.h"
#include "mwsq/errors.hpp"
#include "mwsq/mvee.hpp"
#include "mwsq/reference.hpp"
#include "mwsq/reducing.hpp"
#include "support/brute_force.hpp"

using namespace mwsq;

namespace {

double rho(const MatrixWeightField& w, const DyadicCube& q, double p, const Eigen::VectorXd& e, ReducingKind kind) {
  return directional_average_norm(w, q, p, {e.data(), static_cast<std::size_t>(e.size())}, kind);
}

// Literal directional norm over the cells of q.
double rho_bf(const MatrixWeightField& w, const DyadicCube& q, double p, const Eigen::VectorXd& e, ReducingKind kind) {
  const GridSpec& g = w.grid();
  const double t = kind == ReducingKind::forward ? 1.0 / p : -1.0 / p;
  const double s = kind == ReducingKind::forward ? p : p / (p - 1.0);
  double sum = 0.0, count = 0.0;
  for (std::uint64_t x = 0; x < g.cells(); ++x) {
    if (!bf::inside(g, q, x)) continue;
    sum += std::pow((bf::sym_power(bf::cell_matrix(w, x), t) * e).norm(), s);
    count += 1.0;
  }
  return std::pow(sum / count, 1.0 / s);
}

}  // namespace

TEST_SUITE("reducing") {
  TEST_CASE("directional norms match a literal average") {
    std::mt19937_64 rng(41);
    const auto w = bf::random_matrix_weight(GridSpec(2, 2, 3), rng);
    const auto dirs = sphere_directions(3, 20);
    for (double p : {1.5, 3.0})
      for (auto kind : {ReducingKind::forward, ReducingKind::dual})
        for (int k = 0; k < dirs.cols(); ++k) {
          const Eigen::VectorXd e = dirs.col(k);
          CHECK(rho(w, {1, 2}, p, e, kind) == doctest::Approx(rho_bf(w, {1, 2}, p, e, kind)).epsilon(1e-12));
        }
  }

  TEST_CASE("sphere directions are unit, axes first") {
    const auto dirs = sphere_directions(3, 144);
    CHECK(dirs.cols() == 144);
    for (int k = 0; k < dirs.cols(); ++k) CHECK(dirs.col(k).norm() == doctest::Approx(1.0));
    CHECK((dirs.leftCols(3) - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-15);
  }

  TEST_CASE("identity weight gives the identity") {
    const auto id = MatrixWeightField::identity(GridSpec(1, 3, 3));
    for (double p : {1.5, 2.0, 3.0}) {
      const auto r = reducing_matrix(id, {1, 1}, p);
      CHECK((r.matrix() - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-5);
    }
  }

  TEST_CASE("scalar weights reduce exactly") {
    std::mt19937_64 rng(42);
    const auto w = MatrixWeightField::from_scalar(bf::random_scalar_weight(GridSpec(1, 4, 1), rng));
    const Eigen::VectorXd e = Eigen::VectorXd::Ones(1);
    for (double p : {1.25, 3.0}) {
      for (auto kind : {ReducingKind::forward, ReducingKind::dual}) {
        const auto fit = fit_reducing_matrix(w, {2, 1}, p, kind);
        CHECK(fit.closed_form);
        CHECK(std::abs(fit.matrix(0, 0)) == doctest::Approx(rho_bf(w, {2, 1}, p, e, kind)).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("p = 2 ellipsoid fit matches the closed forms") {
    std::mt19937_64 rng(43);
    for (int n = 2; n <= 3; ++n) {
      const auto w = bf::random_matrix_weight(GridSpec(1, 3, n), rng);
      const auto dirs = sphere_directions(n, default_direction_count(n));
      for (auto kind : {ReducingKind::forward, ReducingKind::dual}) {
        Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(n, n);
        for (std::uint64_t x = 0; x < 4; ++x)
          mean += bf::sym_power(bf::cell_matrix(w, x), kind == ReducingKind::forward ? 1.0 : -1.0);
        const Eigen::MatrixXd closed = bf::sym_power(mean / 4.0, 0.5);
        ReducingOptions opt;
        opt.force_mvee = true;
        const auto fit = fit_reducing_matrix(w, {1, 0}, 2.0, kind, opt);
        CHECK_FALSE(fit.closed_form);
        for (int k = 0; k < dirs.cols(); ++k) {
          const double ratio = (fit.matrix * dirs.col(k)).norm() / (closed * dirs.col(k)).norm();
          CHECK(std::abs(ratio - 1.0) <= 0.02);
        }
      }
    }
  }

  TEST_CASE("fitted matrices satisfy the two-sided guarantee") {
    std::mt19937_64 rng(44);
    ReducingOptions opt;
    opt.force_mvee = true;
    for (int trial = 0; trial < 12; ++trial) {
      const int n = 1 + trial % 3;
      const double p = trial % 2 ? 1.5 : 3.0;
      const auto w = bf::random_matrix_weight(GridSpec(2, 2, n), rng, 1.5);
      const auto kind = trial % 4 < 2 ? ReducingKind::forward : ReducingKind::dual;
      const auto fit = fit_reducing_matrix(w, top_cube(), p, kind, opt);
      const auto ratio = reducing_ratio(w, top_cube(), p, kind, fit.matrix, sphere_directions(n, default_direction_count(n)));
      CHECK(ratio.min_ratio >= 1.0 - 1e-10);
      CHECK(ratio.max_ratio <= std::sqrt(n) * (1.0 + 1e-3));
      CHECK(ratio.max_ratio <= fit.upper_factor * (1.0 + 1e-10));
      CHECK((fit.matrix - fit.matrix.transpose()).norm() < 1e-12);
    }
  }

  TEST_CASE("norm equivalence for matrix arguments") {
    std::mt19937_64 rng(45);
    std::normal_distribution<double> normal;
    for (int n = 1; n <= 3; ++n) {
      const auto w = bf::random_matrix_weight(GridSpec(1, 3, n), rng);
      for (double p : {1.5, 3.0}) {
        const ReducingMatrices red(w, p, ReducingKind::forward);
        const double cn = std::pow(std::sqrt(n) * (1.0 + 1e-6), p) * n;
        for (int k = 0; k < 4; ++k) {
          Eigen::MatrixXd a(n, n);
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) a(i, j) = normal(rng);
          const DyadicCube q{1, static_cast<std::uint64_t>(k % 2)};
          double avg = 0.0;
          for (std::uint64_t x = 0; x < 8; ++x)
            if (bf::inside(w.grid(), q, x))
              avg += std::pow(operator_norm(bf::sym_power(bf::cell_matrix(w, x), 1.0 / p) * a), p) / 4.0;
          const double lhs = std::pow(operator_norm(red.matrix_of(q) * a), p);
          CHECK(lhs / avg <= cn);
          CHECK(avg / lhs <= cn);
        }
      }
    }
  }

  TEST_CASE("all-cube matrices match the per-cube fit") {
    std::mt19937_64 rng(46);
    const auto w = bf::random_matrix_weight(GridSpec(1, 3, 2), rng);
    const ReducingMatrices red(w, 1.5, ReducingKind::dual);
    const auto ref = reference::reducing_matrices(w, 1.5, ReducingKind::dual);
    for (std::uint64_t id = 0; id < w.grid().total_cubes(); ++id) {
      const Eigen::MatrixXd m = red.matrix_of(cube_from_id(w.grid(), id));
      CHECK((m - ref[id]).norm() <= 1e-8 * ref[id].norm());
      Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> inv(red.inverse(id), 2, 2);
      CHECK((m * inv - Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-9);
    }
    CHECK(red.worst_upper_factor() <= std::sqrt(2.0) * (1.0 + 1e-6));
  }

  TEST_CASE("ellipsoid fit of a box") {
    Eigen::MatrixXd pts(2, 2);
    pts << 1.0, 1.0, 1.0, -1.0;
    const auto r = centered_mvee(pts, 1e-9, 10000);
    // The minimum ellipse through (±1, ±1) is the circle of radius √2.
    CHECK(r.shape(0, 0) == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(r.shape(1, 1) == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(std::abs(r.shape(0, 1)) < 1e-6);
    CHECK(r.inner_sq <= 2.0 * (1.0 + 1e-9));
  }

  TEST_CASE("degenerate point sets are rejected") {
    Eigen::MatrixXd pts(2, 3);
    pts << 1.0, 2.0, 3.0, 1.0, 2.0, 3.0;
    CHECK_THROWS_AS(centered_mvee(pts, 1e-6, 1000), DefinitenessError);
  }

  TEST_CASE("iteration cap raises a convergence error") {
    std::mt19937_64 rng(47);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd pts(3, 60);
    for (int i = 0; i < pts.size(); ++i) pts.data()[i] = normal(rng);
    CHECK_THROWS_AS(centered_mvee(pts, 1e-12, 1), ConvergenceError);
  }
}
