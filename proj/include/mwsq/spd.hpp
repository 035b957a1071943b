#pragma once

#include <cmath>

#include <Eigen/Dense>

namespace mwsq {

/// Relative eigenvalue floor: λ_min must exceed this times λ_max.
inline constexpr double kEigenFloorRel = 1e-10;
inline constexpr double kSymmetryTol = 1e-10;

/// Real symmetric positive definite matrix. Construction validates symmetry
/// (relative to the largest entry) and the eigenvalue floor.
class SpdMatrix {
 public:
  explicit SpdMatrix(Eigen::MatrixXd m, double floor_rel = kEigenFloorRel);

  const Eigen::MatrixXd& matrix() const { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }
  Eigen::MatrixXd inverse() const;

 private:
  Eigen::MatrixXd m_;
};

/// A^t by spectral decomposition.
SpdMatrix spd_power(const SpdMatrix& a, double t);

/// Largest singular value.
double operator_norm(const Eigen::Ref<const Eigen::MatrixXd>& a);

/// Squared spectral norm of the row-major n×n matrix at `a`; closed forms for
/// n ≤ 3, Eigen otherwise. Hot-loop helper.
double spectral_norm_sq(const double* a, int n);

/// Largest eigenvalue of a symmetric row-major n×n matrix.
double symmetric_max_eigenvalue(const double* s, int n);

/// c = a·b for row-major n×n matrices.
inline void matmul(const double* a, const double* b, double* c, int n) {
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += a[i * n + k] * b[k * n + j];
      c[i * n + j] = s;
    }
  }
}

/// |a·v| for a row-major n×n matrix.
inline double apply_norm(const double* a, const double* v, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    double r = 0.0;
    for (int k = 0; k < n; ++k) r += a[i * n + k] * v[k];
    s += r * r;
  }
  return std::sqrt(s);
}

}  // namespace mwsq
