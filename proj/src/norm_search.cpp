#include "mwsq/norm_search.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "mwsq/errors.hpp"
#include "mwsq/haar.hpp"
#include "mwsq/norms.hpp"

namespace mwsq {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

struct Evaluator {
  const VectorOperator& op;
  double p;
  const MatrixWeightField& v;
  std::size_t evaluations = 0;
  std::size_t skipped = 0;

  double operator()(const CellField& f) {
    ++evaluations;
    const double denom = weighted_lp_norm(f, v, p);
    if (!(denom > 0.0)) {
      ++skipped;
      return 0.0;
    }
    return lp_norm(op(f), p) / denom;
  }
};

DyadicCube random_cube(const GridSpec& g, std::mt19937_64& rng, int min_level) {
  std::uniform_int_distribution<int> level_dist(std::min(min_level, g.depth()), g.depth());
  const int level = level_dist(rng);
  std::uniform_int_distribution<std::uint64_t> idx(0, g.cubes_at(level) - 1);
  return {level, idx(rng)};
}

Eigen::VectorXd random_unit(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd e(n);
  do {
    for (int i = 0; i < n; ++i) e(i) = normal(rng);
  } while (e.norm() < 1e-12);
  return e.normalized();
}

CellField haar_candidate(const GridSpec& g, std::mt19937_64& rng) {
  const int n = g.vector_dim();
  HaarCoefficients coeffs(g, static_cast<std::size_t>(n));
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> decay_dist(0.3, 1.0);
  const double decay = decay_dist(rng);
  for (int l = 0; l < g.depth(); ++l) {
    const double amp = std::pow(decay, l);
    for (std::uint64_t q = 0; q < g.cubes_at(l); ++q) {
      for (int sig = 1; sig < g.children_per_cube(); ++sig) {
        for (double& c : coeffs.at(g.level_offset(l) + q, sig)) c = amp * normal(rng);
      }
    }
  }
  return haar_reconstruct(coeffs, FieldKind::vector);
}

/// V^{-p'/p}(x) e on a random cube, optionally with the Haar sign pattern of that cube.
CellField weight_adapted_candidate(const GridSpec& g, const MatrixWeightField& v, double p, std::mt19937_64& rng) {
  const int n = g.vector_dim();
  const double pp = p / (p - 1.0);
  const auto& sigma = v.power(-pp / p);
  const DyadicCube cube = random_cube(g, rng, 0);
  const Eigen::VectorXd e = random_unit(n, rng);
  std::uniform_int_distribution<int> sig_dist(0, g.children_per_cube() - 1);
  const int sig = cube.level < g.depth() ? sig_dist(rng) : 0;
  CellField f(g, FieldKind::vector);
  const auto range = cell_range(g, cube);
  for (std::uint64_t x = range.begin; x < range.end; ++x) {
    double sign = 1.0;
    if (sig > 0) {
      const int code = child_code(ancestor_at(cell_cube(g, x), g.dimension(), cube.level + 1), g.dimension());
      sign = haar_sign(sig, code);
    }
    auto out = f.cell(x);
    const double* m = sigma.data() + x * n * n;
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += m[i * n + k] * e(k);
      out[i] = sign * s;
    }
  }
  return f;
}

CellField spike_candidate(const GridSpec& g, std::mt19937_64& rng) {
  const int n = g.vector_dim();
  CellField f(g, FieldKind::vector);
  const DyadicCube cube = random_cube(g, rng, g.depth() / 2);
  const Eigen::VectorXd e = random_unit(n, rng);
  const auto range = cell_range(g, cube);
  for (std::uint64_t x = range.begin; x < range.end; ++x) {
    for (int i = 0; i < n; ++i) f.cell(x)[i] = e(i);
  }
  return f;
}

}  // namespace

NormSearchResult operator_norm_lower_bound(const VectorOperator& op, double p, const MatrixWeightField& v,
                                           const NormSearchOptions& options) {
  if (options.trials < 1) throw InputError("norm search needs at least one trial");
  if (!(p > 1.0)) throw InputError("norm search needs p > 1");
  const GridSpec& g = v.grid();

  struct TrialOutcome {
    double best = 0.0;
    std::size_t evaluations = 0;
    std::size_t skipped = 0;
  };
  std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(options.trials));

#pragma omp parallel for schedule(dynamic, 1)
  for (int t = 0; t < options.trials; ++t) {
    std::mt19937_64 rng(derive_seed(options.seed, static_cast<std::uint64_t>(t)));
    Evaluator eval{op, p, v};
    CellField f = t % 3 == 0 ? haar_candidate(g, rng)
                : t % 3 == 1 ? weight_adapted_candidate(g, v, p, rng)
                             : spike_candidate(g, rng);
    double best = eval(f);
    std::uniform_int_distribution<int> move_dist(0, 2);
    for (int round = 0; round < options.greedy_rounds; ++round) {
      for (int k = 0; k < options.moves_per_round; ++k) {
        const DyadicCube block = random_cube(g, rng, 1);
        static constexpr double kFactors[] = {-1.0, 2.0, 0.5};
        const double factor = kFactors[move_dist(rng)];
        CellField trial = f;
        const auto range = cell_range(g, block);
        for (std::uint64_t x = range.begin; x < range.end; ++x) {
          for (double& c : trial.cell(x)) c *= factor;
        }
        const double r = eval(trial);
        if (r > best) {
          best = r;
          f = std::move(trial);
        }
      }
    }
    outcomes[t] = {best, eval.evaluations, eval.skipped};
  }

  NormSearchResult out;
  for (int t = 0; t < options.trials; ++t) {
    out.evaluations += outcomes[t].evaluations;
    out.skipped += outcomes[t].skipped;
    if (outcomes[t].best > out.lower_bound) {
      out.lower_bound = outcomes[t].best;
      out.best_trial = t;
    }
  }
  Evaluator eval{op, p, v};
  for (const auto& f : options.dictionary) {
    const double r = eval(f);
    if (r > out.lower_bound) {
      out.lower_bound = r;
      out.best_trial = -1;
    }
  }
  out.evaluations += eval.evaluations;
  out.skipped += eval.skipped;
  return out;
}

}  // namespace mwsq
