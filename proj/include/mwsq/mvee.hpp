#pragma once

#include <Eigen/Dense>

namespace mwsq {

/// Minimum-volume enclosing ellipsoid of the centrally symmetric set
/// {±x_i}. The dual (min -log det A with x_iᵀ A x_i ≤ 1) is solved by a
/// log-barrier Newton method; the primal design weights come from the
/// barrier multipliers.
///
/// On return, `shape` = A satisfies max_i x_iᵀ A x_i = 1 exactly, and the
/// scaled ellipsoid {x : xᵀ A x ≤ 1 / inner_sq} lies inside conv{±x_i}.
/// inner_sq ≤ n (1 + tol).
struct MveeResult {
  Eigen::MatrixXd shape;
  double inner_sq = 0.0;
  int iterations = 0;
};

/// `points` holds one point per column. Throws ConvergenceError when the
/// iteration cap is reached and DefinitenessError when the points do not
/// span R^n.
MveeResult centered_mvee(const Eigen::MatrixXd& points, double tol, int max_iterations);

/// `count` deterministic, well-spread unit directions in R^n (one column
/// each), covering the sphere up to sign. The coordinate axes come first.
Eigen::MatrixXd sphere_directions(int n, int count);

}  // namespace mwsq
