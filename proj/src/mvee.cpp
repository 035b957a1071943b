#include "mwsq/mvee.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "mwsq/errors.hpp"

namespace mwsq {
namespace {

void refresh(const Eigen::MatrixXd& x, const Eigen::VectorXd& u, Eigen::MatrixXd& xinv, Eigen::VectorXd& omega) {
  const Eigen::MatrixXd gram = x * u.asDiagonal() * x.transpose();
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 0.0)) {
    throw DefinitenessError("MVEE points do not span the space");
  }
  xinv = ldlt.solve(Eigen::MatrixXd::Identity(x.rows(), x.rows()));
  omega = (x.transpose() * xinv).cwiseProduct(x.transpose()).rowwise().sum();
}

}  // namespace

MveeResult centered_mvee(const Eigen::MatrixXd& x, double tol, int max_iterations) {
  const int n = static_cast<int>(x.rows());
  const Eigen::Index m = x.cols();
  if (m < n) throw DefinitenessError("MVEE needs at least n points");

  // Dual problem over symmetric A (k = n(n+1)/2 coordinates):
  //   minimize -log det A  subject to  x_iᵀ A x_i ≤ 1,
  // solved with a log barrier. Row i of `phi` maps the coordinates of A to x_iᵀ A x_i.
  const int k = n * (n + 1) / 2;
  std::vector<std::pair<int, int>> entry;
  for (int r = 0; r < n; ++r)
    for (int c = r; c < n; ++c) entry.emplace_back(r, c);
  Eigen::MatrixXd phi(m, k);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (int l = 0; l < k; ++l) {
      const auto [r, c] = entry[l];
      phi(i, l) = (r == c ? 1.0 : 2.0) * x(r, i) * x(c, i);
    }
  }
  auto to_matrix = [&](const Eigen::VectorXd& a) {
    Eigen::MatrixXd out(n, n);
    for (int l = 0; l < k; ++l) {
      const auto [r, c] = entry[l];
      out(r, c) = out(c, r) = a(l);
    }
    return out;
  };
  // Slacks 1 - x_iᵀ A x_i are carried along with A and updated by increments,
  // which keeps their relative accuracy as they approach zero.
  auto barrier = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& slack, double t, double& value) {
    if (!(slack.minCoeff() > 0.0)) return false;
    Eigen::LLT<Eigen::MatrixXd> llt(to_matrix(a));
    if (llt.info() != Eigen::Success) return false;
    double logdet = 0.0;
    for (int r = 0; r < n; ++r) logdet += 2.0 * std::log(llt.matrixL()(r, r));
    value = -t * logdet - slack.array().log().sum();
    return true;
  };

  const double radius_sq = x.colwise().squaredNorm().maxCoeff();
  if (!(radius_sq > 0.0)) throw DefinitenessError("MVEE points do not span the space");
  Eigen::VectorXd a = Eigen::VectorXd::Zero(k);
  for (int l = 0; l < k; ++l)
    if (entry[l].first == entry[l].second) a(l) = 0.5 / radius_sq;
  Eigen::VectorXd slack = Eigen::VectorXd::Ones(m) - phi * a;

  Eigen::VectorXd u(m);
  Eigen::MatrixXd xinv;
  Eigen::VectorXd omega;
  double t = 1.0;
  int it = 0;
  for (;;) {
    // Centering by damped Newton.
    for (int inner = 0;; ++inner) {
      const Eigen::MatrixXd ainv = to_matrix(a).inverse();
      Eigen::VectorXd grad = phi.transpose() * slack.cwiseInverse();
      Eigen::MatrixXd hess = phi.transpose() * slack.array().square().inverse().matrix().asDiagonal() * phi;
      for (int l = 0; l < k; ++l) {
        const auto [r, c] = entry[l];
        grad(l) -= t * (r == c ? 1.0 : 2.0) * ainv(r, c);
        for (int q = 0; q < k; ++q) {
          const auto [r2, c2] = entry[q];
          // tr(A⁻¹ E_l A⁻¹ E_q) for symmetric basis matrices E.
          double tr = ainv(c, r2) * ainv(c2, r) + (r2 == c2 ? 0.0 : ainv(c, c2) * ainv(r2, r));
          if (r != c) tr += ainv(r, r2) * ainv(c2, c) + (r2 == c2 ? 0.0 : ainv(r, c2) * ainv(r2, c));
          hess(l, q) += t * tr;
        }
      }
      const Eigen::VectorXd step = -hess.ldlt().solve(grad);
      const double decrement = -grad.dot(step);
      if (decrement <= 1e-14 || inner >= 50) break;
      if (++it > max_iterations) {
        throw ConvergenceError("MVEE did not reach tolerance within " + std::to_string(max_iterations) + " iterations");
      }
      double f0 = 0.0, f1 = 0.0;
      barrier(a, slack, t, f0);
      const Eigen::VectorXd dslack = phi * step;
      double s = 1.0;
      // Inside the quadratic region only feasibility is enforced; the Armijo
      // test is meaningless once decrements fall below the rounding of f.
      const bool pure = decrement < 0.1;
      while (!barrier(a + s * step, slack - s * dslack, t, f1) || (!pure && f1 > f0 - 0.25 * s * decrement)) {
        s *= 0.5;
        if (s < 1e-16) break;
      }
      if (s < 1e-16) break;
      a += s * step;
      slack -= s * dslack;
    }

    // Primal weights from the barrier multipliers; stop once they certify the tolerance.
    u = slack.cwiseInverse();
    u /= u.sum();
    refresh(x, u, xinv, omega);
    if (omega.maxCoeff() / n - 1.0 <= tol) break;
    if (t > 1e18) {
      throw ConvergenceError("MVEE barrier parameter exhausted before reaching tolerance");
    }
    t *= 10.0;
  }

  MveeResult out;
  out.inner_sq = omega.maxCoeff();
  out.shape = xinv / out.inner_sq;
  out.shape = 0.5 * (out.shape + out.shape.transpose());
  out.iterations = it;
  return out;
}

Eigen::MatrixXd sphere_directions(int n, int count) {
  count = std::max(count, n);
  Eigen::MatrixXd dirs = Eigen::MatrixXd::Zero(n, count);
  for (int i = 0; i < n; ++i) dirs(i, i) = 1.0;
  if (n == 1) return dirs.leftCols(1);

  const int extra = count - n;
  if (n == 2) {
    // Half circle at uniform angles; angle 0 and π/2 are already the axes.
    for (int k = 0; k < extra; ++k) {
      const double t = std::numbers::pi * (k + 0.5) / extra;
      dirs(0, n + k) = std::cos(t);
      dirs(1, n + k) = std::sin(t);
    }
  } else if (n == 3) {
    // Fibonacci lattice on the upper hemisphere.
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < extra; ++k) {
      const double z = 1.0 - (k + 0.5) / extra;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      dirs(0, n + k) = r * std::cos(golden * k);
      dirs(1, n + k) = r * std::sin(golden * k);
      dirs(2, n + k) = z;
    }
  } else {
    std::mt19937_64 rng(0x5eed0fd1u + static_cast<unsigned>(n));
    std::normal_distribution<double> normal;
    for (int k = 0; k < extra; ++k) {
      Eigen::VectorXd v(n);
      for (int i = 0; i < n; ++i) v(i) = normal(rng);
      dirs.col(n + k) = v.normalized();
    }
  }
  return dirs;
}

}  // namespace mwsq
