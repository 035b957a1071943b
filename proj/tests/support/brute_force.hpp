#pragma once

// Literal, unoptimized evaluations of the defining formulas. They share only
// grid bookkeeping with the library; Haar signs come from coordinates and
// matrix powers from a fresh eigendecomposition.

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mwsq/family.hpp"
#include "mwsq/field.hpp"
#include "mwsq/grid.hpp"
#include "mwsq/operators.hpp"
#include "mwsq/reducing.hpp"
#include "mwsq/weight_field.hpp"

namespace bf {

using mwsq::CellField;
using mwsq::DyadicCube;
using mwsq::GridSpec;

inline std::vector<DyadicCube> all_cubes(const GridSpec& g) {
  std::vector<DyadicCube> out;
  for (int l = 0; l <= g.depth(); ++l)
    for (std::uint64_t k = 0; k < g.cubes_at(l); ++k) out.push_back({l, k});
  return out;
}

inline bool inside(const GridSpec& g, const DyadicCube& outer, std::uint64_t cell) {
  const auto c = mwsq::coordinates(mwsq::cell_cube(g, cell), g.dimension());
  const auto o = mwsq::coordinates(outer, g.dimension());
  const int shift = g.depth() - outer.level;
  for (int i = 0; i < g.dimension(); ++i)
    if ((c[i] >> shift) != o[i]) return false;
  return true;
}

/// Haar function (cube, σ) at a cell inside the cube, from coordinates.
inline double haar(const GridSpec& g, const DyadicCube& cube, int sigma, std::uint64_t cell) {
  const auto c = mwsq::coordinates(mwsq::cell_cube(g, cell), g.dimension());
  const int shift = g.depth() - cube.level - 1;
  double sign = 1.0;
  for (int i = 0; i < g.dimension(); ++i) {
    if ((sigma >> i) & 1) {
      const bool upper = (c[i] >> shift) & 1;
      if (upper) sign = -sign;
    }
  }
  return sign / std::sqrt(mwsq::measure(cube, g.dimension()));
}

/// f_J^σ = Σ_{cells ⊆ J} f h |cell|, all components.
inline Eigen::VectorXd coefficient(const CellField& f, const DyadicCube& cube, int sigma) {
  const GridSpec& g = f.grid();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(f.arity()));
  for (std::uint64_t x = 0; x < g.cells(); ++x) {
    if (!inside(g, cube, x)) continue;
    const double h = haar(g, cube, sigma, x) * g.cell_measure();
    for (std::size_t i = 0; i < f.arity(); ++i) out(static_cast<Eigen::Index>(i)) += f.cell(x)[i] * h;
  }
  return out;
}

inline Eigen::MatrixXd cell_matrix(const mwsq::MatrixWeightField& w, std::uint64_t x) {
  const int n = w.n();
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = w.base().cell(x)[i * n + j];
  return m;
}

inline Eigen::MatrixXd sym_power(const Eigen::MatrixXd& m, double t) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  return es.eigenvectors() * es.eigenvalues().array().pow(t).matrix().asDiagonal() * es.eigenvectors().transpose();
}

inline Eigen::VectorXd cell_vector(const CellField& f, std::uint64_t x) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(f.arity()));
  for (std::size_t i = 0; i < f.arity(); ++i) v(static_cast<Eigen::Index>(i)) = f.cell(x)[i];
  return v;
}

/// Every Haar coefficient, keyed by (level, morton, σ).
using CoefficientMap = std::map<std::tuple<int, std::uint64_t, int>, Eigen::VectorXd>;
inline CoefficientMap coefficients(const CellField& f) {
  CoefficientMap out;
  const GridSpec& g = f.grid();
  for (const auto& q : all_cubes(g)) {
    if (q.level == g.depth()) continue;
    for (int s = 1; s < g.children_per_cube(); ++s) out[{q.level, q.morton, s}] = coefficient(f, q, s);
  }
  return out;
}

inline std::vector<double> square_function(const mwsq::MatrixWeightField& u, double p, const CellField& f) {
  const GridSpec& g = f.grid();
  const auto coeffs = coefficients(f);
  std::vector<double> out(g.cells());
  for (std::uint64_t x = 0; x < g.cells(); ++x) {
    const Eigen::MatrixXd w = sym_power(cell_matrix(u, x), 1.0 / p);
    double s = 0.0;
    for (const auto& [key, c] : coeffs) {
      const DyadicCube q{std::get<0>(key), std::get<1>(key)};
      if (inside(g, q, x)) s += (w * c).squaredNorm() / mwsq::measure(q, g.dimension());
    }
    out[x] = std::sqrt(s);
  }
  return out;
}

inline double reduced_average(const CellField& f, const DyadicCube& cube, const Eigen::MatrixXd& r) {
  const GridSpec& g = f.grid();
  double s = 0.0;
  std::size_t count = 0;
  for (std::uint64_t x = 0; x < g.cells(); ++x) {
    if (!inside(g, cube, x)) continue;
    s += (r * cell_vector(f, x)).norm();
    ++count;
  }
  return s / static_cast<double>(count);
}

inline std::vector<double> sparse_operator(const mwsq::MatrixWeightField& u, double p, double r,
                                           const mwsq::SparseFamily& family, const CellField& f,
                                           const mwsq::ReducingMatrices& reducing) {
  const GridSpec& g = f.grid();
  std::vector<double> out(g.cells(), 0.0);
  for (const auto& m : family.members()) {
    const Eigen::MatrixXd red = reducing.matrix_of(m.cube);
    const double avg = reduced_average(f, m.cube, red);
    const Eigen::MatrixXd inv = red.inverse();
    for (std::uint64_t x = 0; x < g.cells(); ++x) {
      if (!inside(g, m.cube, x)) continue;
      const Eigen::MatrixXd w = sym_power(cell_matrix(u, x), 1.0 / p);
      const double norm = Eigen::JacobiSVD<Eigen::MatrixXd>(w * inv).singularValues()(0);
      out[x] += std::pow(avg * norm, r);
    }
  }
  for (double& v : out) v = std::pow(v, 1.0 / r);
  return out;
}

inline double carleson_star_norm(const mwsq::CoefficientField& a, double p, double r) {
  const GridSpec& g = a.grid();
  double best = 0.0;
  for (const auto& j : all_cubes(g)) {
    double total = 0.0;
    std::size_t count = 0;
    for (std::uint64_t x = 0; x < g.cells(); ++x) {
      if (!inside(g, j, x)) continue;
      double s = 0.0;
      for (const auto& [id, values] : a.entries()) {
        const DyadicCube l = mwsq::cube_from_id(g, id);
        if (!mwsq::contains(j, l, g.dimension()) || !inside(g, l, x)) continue;
        s += values[x - mwsq::cell_range(g, l).begin];
      }
      total += std::pow(s, p / r);
      ++count;
    }
    best = std::max(best, total / static_cast<double>(count));
  }
  return best;
}

/// Keeps the cubes of `hits` that have no strict ancestor in `hits`.
inline std::vector<DyadicCube> maximal(const GridSpec& g, const std::vector<DyadicCube>& hits) {
  std::vector<DyadicCube> out;
  for (const auto& l : hits) {
    bool covered = false;
    for (const auto& q : hits)
      if (q != l && mwsq::contains(q, l, g.dimension())) covered = true;
    if (!covered) out.push_back(l);
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<DyadicCube> strict_subcubes(const GridSpec& g, const DyadicCube& j) {
  std::vector<DyadicCube> out;
  for (const auto& q : all_cubes(g))
    if (q.level > j.level && mwsq::contains(j, q, g.dimension())) out.push_back(q);
  return out;
}

/// Maximal L ⊊ J with Σ_{J ⊇ I ⊇ L} Σ_σ |𝒰_J f_I^σ|²/|I| > λ ⟨|𝒰_J f|⟩_J².
inline std::vector<DyadicCube> stopping_children_sq(const CellField& f, const mwsq::ReducingMatrices& reducing,
                                                    const DyadicCube& j, double lambda) {
  const GridSpec& g = f.grid();
  const Eigen::MatrixXd red = reducing.matrix_of(j);
  const double avg = reduced_average(f, j, red);
  if (avg == 0.0) return {};
  std::vector<DyadicCube> hits;
  for (const auto& l : strict_subcubes(g, j)) {
    double s = 0.0;
    for (int level = j.level; level <= l.level && level < g.depth(); ++level) {
      const DyadicCube i = mwsq::ancestor_at(l, g.dimension(), level);
      for (int sigma = 1; sigma < g.children_per_cube(); ++sigma)
        s += (red * coefficient(f, i, sigma)).squaredNorm() / mwsq::measure(i, g.dimension());
    }
    if (s > lambda * avg * avg) hits.push_back(l);
  }
  return maximal(g, hits);
}

/// Relative distance of the running sum for L ⊊ J from λ ⟨|𝒰_J f|⟩_J².
inline double stopping_margin_sq(const CellField& f, const mwsq::ReducingMatrices& reducing, const DyadicCube& j,
                                 const DyadicCube& l, double lambda) {
  const GridSpec& g = f.grid();
  const Eigen::MatrixXd red = reducing.matrix_of(j);
  const double avg = reduced_average(f, j, red);
  double s = 0.0;
  for (int level = j.level; level <= l.level && level < g.depth(); ++level) {
    const DyadicCube i = mwsq::ancestor_at(l, g.dimension(), level);
    for (int sigma = 1; sigma < g.children_per_cube(); ++sigma)
      s += (red * coefficient(f, i, sigma)).squaredNorm() / mwsq::measure(i, g.dimension());
  }
  return std::abs(s / (lambda * avg * avg) - 1.0);
}

/// Maximal L ⊊ J with ⨍_L |𝒰_J f| > λ ⨍_J |𝒰_J f| or ‖𝒰_L 𝒰_J^{-1}‖ > λ.
inline std::vector<DyadicCube> corona_children(const CellField& f, const mwsq::ReducingMatrices& reducing,
                                               const DyadicCube& j, double lambda) {
  const GridSpec& g = f.grid();
  const Eigen::MatrixXd red = reducing.matrix_of(j);
  const Eigen::MatrixXd inv = red.inverse();
  const double avg = reduced_average(f, j, red);
  std::vector<DyadicCube> hits;
  for (const auto& l : strict_subcubes(g, j)) {
    const bool one = avg > 0.0 && reduced_average(f, l, red) > lambda * avg;
    const double norm = Eigen::JacobiSVD<Eigen::MatrixXd>(reducing.matrix_of(l) * inv).singularValues()(0);
    if (one || norm > lambda) hits.push_back(l);
  }
  return maximal(g, hits);
}

/// Scalar two-weight A_p: sup_I ⨍u (⨍ v^{-p'/p})^{p/p'}.
inline double scalar_ap(const std::vector<double>& u, const std::vector<double>& v, const GridSpec& g, double p) {
  const double pp = p / (p - 1.0);
  double best = 0.0;
  for (const auto& q : all_cubes(g)) {
    double su = 0.0, sv = 0.0, count = 0.0;
    for (std::uint64_t x = 0; x < g.cells(); ++x) {
      if (!inside(g, q, x)) continue;
      su += u[x];
      sv += std::pow(v[x], -pp / p);
      count += 1.0;
    }
    best = std::max(best, (su / count) * std::pow(sv / count, p / pp));
  }
  return best;
}

/// Dyadic Fujii–Wilson A_∞ by enumeration of every cube pair.
inline double fujii_wilson(const std::vector<double>& w, const GridSpec& g) {
  double best = 0.0;
  const auto cubes = all_cubes(g);
  for (const auto& i : cubes) {
    double num = 0.0, den = 0.0;
    for (std::uint64_t x = 0; x < g.cells(); ++x) {
      if (!inside(g, i, x)) continue;
      den += w[x];
      double m = 0.0;
      for (const auto& q : cubes) {
        if (!mwsq::contains(i, q, g.dimension()) || !inside(g, q, x)) continue;
        double s = 0.0, c = 0.0;
        for (std::uint64_t y = 0; y < g.cells(); ++y)
          if (inside(g, q, y)) { s += w[y]; c += 1.0; }
        m = std::max(m, s / c);
      }
      num += m;
    }
    best = std::max(best, num / den);
  }
  return best;
}

inline std::vector<double> dyadic_maximal(const std::vector<double>& f, const GridSpec& g) {
  std::vector<double> out(g.cells(), 0.0);
  for (const auto& q : all_cubes(g)) {
    double s = 0.0, c = 0.0;
    for (std::uint64_t x = 0; x < g.cells(); ++x)
      if (inside(g, q, x)) { s += std::abs(f[x]); c += 1.0; }
    for (std::uint64_t x = 0; x < g.cells(); ++x)
      if (inside(g, q, x)) out[x] = std::max(out[x], s / c);
  }
  return out;
}

inline double relative_gap(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num = std::max(num, std::abs(a[i] - b[i]));
    den = std::max(den, std::abs(b[i]));
  }
  return den > 0.0 ? num / den : num;
}

inline std::vector<double> to_vector(const CellField& f) { return {f.values().begin(), f.values().end()}; }

inline CellField random_vector_field(const GridSpec& g, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  CellField f(g, mwsq::FieldKind::vector);
  for (double& v : f.values()) v = normal(rng);
  return f;
}

inline CellField random_scalar_weight(const GridSpec& g, std::mt19937_64& rng, double spread = 1.0) {
  std::normal_distribution<double> normal;
  CellField f(g, mwsq::FieldKind::scalar);
  for (double& v : f.values()) v = std::exp(spread * normal(rng));
  return f;
}

/// Random SPD matrix field with eigenvalues in [e^{-spread}, e^{spread}].
inline mwsq::MatrixWeightField random_matrix_weight(const GridSpec& g, std::mt19937_64& rng, double spread = 1.0) {
  const int n = g.vector_dim();
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(-spread, spread);
  CellField w(g, mwsq::FieldKind::matrix);
  for (std::uint64_t x = 0; x < g.cells(); ++x) {
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = normal(rng);
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    const Eigen::MatrixXd q = qr.householderQ();
    Eigen::VectorXd lam(n);
    for (int i = 0; i < n; ++i) lam(i) = std::exp(unit(rng));
    const Eigen::MatrixXd m = q * lam.asDiagonal() * q.transpose();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) w.cell(x)[i * n + j] = 0.5 * (m(i, j) + m(j, i));
  }
  return mwsq::MatrixWeightField(std::move(w));
}

}  // namespace bf
