#include "mwsq/spd.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mwsq/errors.hpp"

namespace mwsq {

SpdMatrix::SpdMatrix(Eigen::MatrixXd m, double floor_rel) : m_(std::move(m)) {
  if (m_.rows() != m_.cols() || m_.rows() == 0) throw InputError("SPD matrix must be square and non-empty");
  if (!m_.allFinite()) throw InputError("SPD matrix has non-finite entries");
  const double scale = std::max(m_.cwiseAbs().maxCoeff(), 1e-300);
  if ((m_ - m_.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * scale) {
    throw DefinitenessError("matrix is not symmetric");
  }
  m_ = 0.5 * (m_ + m_.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m_, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || lo < floor_rel * hi) throw DefinitenessError("matrix is not positive definite above the floor");
}

Eigen::MatrixXd SpdMatrix::inverse() const { return m_.llt().solve(Eigen::MatrixXd::Identity(dim(), dim())); }

SpdMatrix spd_power(const SpdMatrix& a, double t) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a.matrix());
  const Eigen::VectorXd lam = es.eigenvalues().array().pow(t);
  Eigen::MatrixXd out = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
  return SpdMatrix(0.5 * (out + out.transpose()), 0.0);
}

double operator_norm(const Eigen::Ref<const Eigen::MatrixXd>& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  return svd.singularValues()(0);
}

double symmetric_max_eigenvalue(const double* s, int n) {
  switch (n) {
    case 1:
      return s[0];
    case 2: {
      const double tr = 0.5 * (s[0] + s[3]);
      const double diff = 0.5 * (s[0] - s[3]);
      return tr + std::sqrt(diff * diff + s[1] * s[1]);
    }
    case 3: {
      // Trigonometric solution of the characteristic cubic.
      const double a00 = s[0], a11 = s[4], a22 = s[8];
      const double a01 = s[1], a02 = s[2], a12 = s[5];
      const double off = a01 * a01 + a02 * a02 + a12 * a12;
      const double q = (a00 + a11 + a22) / 3.0;
      const double b00 = a00 - q, b11 = a11 - q, b22 = a22 - q;
      const double p2 = b00 * b00 + b11 * b11 + b22 * b22 + 2.0 * off;
      if (p2 <= 1e-300) return q;
      const double pp = std::sqrt(p2 / 6.0);
      const double det = b00 * (b11 * b22 - a12 * a12) - a01 * (a01 * b22 - a12 * a02) +
                         a02 * (a01 * a12 - b11 * a02);
      const double r = std::clamp(det / (2.0 * pp * pp * pp), -1.0, 1.0);
      return q + 2.0 * pp * std::cos(std::acos(r) / 3.0);
    }
    default: {
      Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(s, n, n);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(m), Eigen::EigenvaluesOnly);
      return es.eigenvalues()(n - 1);
    }
  }
}

double spectral_norm_sq(const double* a, int n) {
  if (n == 1) return a[0] * a[0];
  double g[9];
  if (n <= 3) {
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        double s = 0.0;
        for (int k = 0; k < n; ++k) s += a[k * n + i] * a[k * n + j];
        g[i * n + j] = s;
        g[j * n + i] = s;
      }
    }
    return std::max(0.0, symmetric_max_eigenvalue(g, n));
  }
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(a, n, n);
  const double s = operator_norm(Eigen::MatrixXd(m));
  return s * s;
}

}  // namespace mwsq
