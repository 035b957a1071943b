// Serial reference kernels against the parallel library kernels: wall time
// and largest relative disagreement per kernel.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>

#include <omp.h>

#include "CLI11.hpp"
#include "mwsq/characteristics.hpp"
#include "mwsq/generators.hpp"
#include "mwsq/haar.hpp"
#include "mwsq/operators.hpp"
#include "mwsq/reference.hpp"
#include "mwsq/stopping.hpp"

using namespace mwsq;

namespace {

template <class F>
double best_of(int repeats, F&& f) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

double field_gap(const CellField& a, const CellField& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < a.values().size(); ++k) {
    num = std::max(num, std::abs(a.values()[k] - b.values()[k]));
    den = std::max(den, std::abs(b.values()[k]));
  }
  return den > 0.0 ? num / den : num;
}

double scalar_gap(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

void row(const char* name, double ref, double par, double gap) {
  std::printf("%-22s %12.6f %12.6f %9.2fx %12.3e\n", name, ref, par, ref / std::max(par, 1e-12), gap);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reference vs parallel kernel benchmark"};
  int d = 2, depth = 5, n = 2, repeats = 3;
  double p = 1.5;
  std::uint64_t seed = 7;
  app.add_option("--d", d);
  app.add_option("--depth", depth);
  app.add_option("--n", n);
  app.add_option("--p", p);
  app.add_option("--repeats", repeats);
  app.add_option("--seed", seed);
  CLI11_PARSE(app, argc, argv);

  WeightFamilySpec spec;
  spec.grid = GridSpec(d, depth, n);
  spec.seed = seed;
  const auto u = generate_weight(spec);
  const auto f = generate_function(spec.grid, seed + 1);
  std::printf("grid d=%d N=%d n=%d p=%g, threads=%d\n", d, depth, n, p, omp_get_max_threads());
  std::printf("%-22s %12s %12s %10s %12s\n", "kernel", "reference_s", "parallel_s", "speedup", "rel_gap");

  {
    HaarCoefficients a = haar_transform(f), b = a;
    const double tr = best_of(repeats, [&] { b = reference::haar_transform(f); });
    const double tp = best_of(repeats, [&] { a = haar_transform(f); });
    row("haar_transform", tr, tp,
        field_gap(haar_reconstruct(a, FieldKind::vector), haar_reconstruct(b, FieldKind::vector)));
  }
  {
    CellField a = square_function(u, p, f), b = a;
    const double tr = best_of(repeats, [&] { b = reference::square_function(u, p, f); });
    const double tp = best_of(repeats, [&] { a = square_function(u, p, f); });
    row("square_function", tr, tp, field_gap(a, b));
  }
  if (spec.grid.cells() <= 256) {
    double a = 0.0, b = 0.0;
    const double tr = best_of(1, [&] { b = reference::ap_characteristic(u, u, p); });
    const double tp = best_of(1, [&] { a = ap_characteristic(u, u, p).value; });
    row("ap_characteristic", tr, tp, scalar_gap(a, b));
  }
  {
    std::vector<Eigen::MatrixXd> ref;
    const double tr = best_of(1, [&] { ref = reference::reducing_matrices(u, p, ReducingKind::forward); });
    double gap = 0.0;
    const double tp = best_of(1, [&] {
      const ReducingMatrices red(u, p, ReducingKind::forward);
      for (std::uint64_t id = 0; id < ref.size(); ++id) {
        const Eigen::MatrixXd m = red.matrix_of(cube_from_id(spec.grid, id));
        gap = std::max(gap, (m - ref[id]).norm() / ref[id].norm());
      }
    });
    row("reducing_matrices", tr, tp, gap);
  }
  const StoppingContext ctx(u, p, f);
  const auto family = build_sparse_family(ctx, kDefaultSparseLambda);
  {
    CellField a = generalized_sparse_operator(u, p, 2.0, family, f, ctx.reducing()), b = a;
    const double tr = best_of(repeats, [&] { b = reference::sparse_operator(u, p, 2.0, family, f, ctx.reducing()); });
    const double tp = best_of(repeats, [&] { a = generalized_sparse_operator(u, p, 2.0, family, f, ctx.reducing()); });
    row("sparse_operator", tr, tp, field_gap(a, b));
  }
  {
    const auto coeffs = sparse_family_coefficients(u, p, family, ctx.reducing());
    double a = 0.0, b = 0.0;
    const double tr = best_of(repeats, [&] { b = reference::carleson_star_norm(coeffs, p, 2.0); });
    const double tp = best_of(repeats, [&] { a = carleson_star_norm(coeffs, p, 2.0).value; });
    row("carleson_star_norm", tr, tp, scalar_gap(a, b));
  }
  return 0;
}
