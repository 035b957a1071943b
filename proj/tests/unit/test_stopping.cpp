#include <cmath>
#include <algorithm>
#include <memory>
#include <random>

#include "doctest.h"
#include "mwsq/corona.hpp"
#include "mwsq/reference.hpp"
#include "mwsq/stopping.hpp"
#include "support/brute_force.hpp"

using namespace mwsq;

namespace {

struct Random {
  MatrixWeightField u;
  StoppingContext ctx;
  Random(const GridSpec& g, double p, std::mt19937_64& rng, double spread)
      : u(bf::random_matrix_weight(g, rng, spread)), ctx(u, p, bf::random_vector_field(g, rng)) {}
};

std::unique_ptr<Random> random_context(int d, int depth, int n, double p, std::uint64_t seed, double spread = 1.0) {
  std::mt19937_64 rng(seed);
  return std::make_unique<Random>(GridSpec(d, depth, n), p, rng, spread);
}

}  // namespace

TEST_SUITE("stopping") {
  TEST_CASE("sparse check on small families") {
    const GridSpec g(1, 3, 1);
    SparseFamily one_child(g);
    one_child.add(top_cube());
    one_child.add({1, 0}, 1);
    const auto half = verify_sparse(one_child);
    CHECK(half.sparse);
    CHECK(half.worst_ratio == doctest::Approx(0.5));

    SparseFamily both(g);
    both.add(top_cube());
    both.add({1, 0}, 1);
    both.add({1, 1}, 1);
    CHECK_FALSE(verify_sparse(both).sparse);
    CHECK(verify_sparse(both).worst_cube == top_cube());
    CHECK_FALSE(both.add({1, 1}));
    CHECK(both.generations() == 2);
  }

  TEST_CASE("constant functions stop nowhere") {
    const GridSpec g(2, 3, 2);
    std::mt19937_64 rng(71);
    const auto u = bf::random_matrix_weight(g, rng);
    CellField f(g, FieldKind::vector);
    for (std::size_t x = 0; x < f.cells(); ++x) f.cell(x)[0] = 1.0;
    const StoppingContext ctx(u, 2.0, f);
    const auto fam = build_sparse_family(ctx, 16.0);
    REQUIRE(fam.size() == 1);
    CHECK(fam.members()[0].cube == top_cube());
  }

  TEST_CASE("zero functions and huge thresholds stop nowhere") {
    const auto owner = random_context(1, 4, 2, 1.5, 72);
    const StoppingContext& ctx = owner->ctx;
    CHECK(stopping_children_sq(ctx, top_cube(), 1e300).empty());
    CHECK(corona_children(ctx, top_cube(), 1e300).empty());
    const StoppingContext zero(ctx.weight(), 1.5, CellField(ctx.grid(), FieldKind::vector));
    CHECK(stopping_children_sq(zero, top_cube(), 2.0).empty());
  }

  TEST_CASE("stopping children match exhaustive enumeration") {
    for (int trial = 0; trial < 6; ++trial) {
      const int d = 1 + trial % 2;
      const auto owner = random_context(d, d == 1 ? 6 : 3, 1 + trial % 3, trial % 2 ? 3.0 : 1.5, 73 + trial, 1.5);
      const StoppingContext& ctx = owner->ctx;
      for (double lambda : {0.5, 2.0, 8.0}) {
        for (const auto& j : bf::all_cubes(ctx.grid())) {
          const auto fast = stopping_children_sq(ctx, j, lambda);
          auto sorted = fast;
          std::sort(sorted.begin(), sorted.end());
          CHECK(sorted == bf::stopping_children_sq(ctx.f(), ctx.reducing(), j, lambda));
          auto ref = reference::stopping_children_sq(ctx, j, lambda);
          std::sort(ref.begin(), ref.end());
          CHECK(ref == sorted);
        }
      }
    }
  }

  TEST_CASE("own averages are reduced averages") {
    const auto owner = random_context(2, 2, 2, 1.5, 79);
    const StoppingContext& ctx = owner->ctx;
    for (const auto& q : bf::all_cubes(ctx.grid()))
      CHECK(ctx.own_averages()[cube_id(ctx.grid(), q)] ==
            doctest::Approx(bf::reduced_average(ctx.f(), q, ctx.reducing().matrix_of(q))).epsilon(1e-12));
  }

  TEST_CASE("families at the default threshold are sparse with disjoint sets") {
    for (int trial = 0; trial < 4; ++trial) {
      const auto owner = random_context(1 + trial % 2, trial % 2 ? 4 : 7, 2, 2.0, 80 + trial, 1.0);
      const StoppingContext& ctx = owner->ctx;
      const auto fam = build_sparse_family(ctx, kDefaultSparseLambda);
      CHECK(fam.contains(top_cube()));
      CHECK(verify_sparse(fam).sparse);
      const auto sets = disjoint_sets(fam);
      CHECK(sets.disjoint);
      CHECK(sets.measure_bound);
      CHECK(sets.worst_ratio <= 2.0);
      const auto step = weak_type_step(ctx, fam, kDefaultSparseLambda);
      CHECK(step.inclusion);
      CHECK(step.packing <= 0.5);
      const auto dom = verify_pointwise_domination(ctx, fam);
      CHECK(std::isfinite(dom.max_ratio));
      for (const auto& m : fam.members())
        if (m.parent) CHECK(contains(*m.parent, m.cube, ctx.grid().dimension()));
    }
  }

  TEST_CASE("calibration raises lambda until the verifier passes") {
    StoppingConfig config;
    config.lambda = 2.0;
    const auto out = calibrate_lambda([](double l) { return l; },
                                      [](double l) { return std::pair{l >= 8.0, 8.0 / l}; }, config);
    CHECK(out.lambda == 8.0);
    CHECK(out.result == 8.0);
    CHECK(out.steps.size() == 3);
    CHECK(out.findings.empty());

    config.max_escalations = 1;
    CHECK_THROWS_AS(calibrate_lambda([](double l) { return l; }, [](double l) { return std::pair{l >= 8.0, 1.0}; },
                                     config),
                    CalibrationError);

    config.max_escalations = 5;
    const auto rising = calibrate_lambda([](double l) { return l; },
                                         [](double l) { return std::pair{l >= 8.0, l}; }, config);
    CHECK(rising.findings.size() == 2);
  }

  TEST_CASE("invalid stopping configs are input errors") {
    StoppingConfig config;
    config.lambda = 0.5;
    CHECK_THROWS_AS(config.validate(), InputError);
    config.lambda = 2.0;
    config.escalation_factor = 1.0;
    CHECK_THROWS_AS(config.validate(), InputError);
  }
}

TEST_SUITE("corona") {
  TEST_CASE("corona children match exhaustive enumeration") {
    for (int trial = 0; trial < 6; ++trial) {
      const int d = 1 + trial % 2;
      const auto owner = random_context(d, d == 1 ? 6 : 3, 1 + trial % 3, trial % 2 ? 3.0 : 1.5, 90 + trial, 1.5);
      const StoppingContext& ctx = owner->ctx;
      for (double lambda : {1.5, 4.0, 8.0}) {
        for (const auto& j : bf::all_cubes(ctx.grid())) {
          auto fast = corona_children(ctx, j, lambda);
          std::sort(fast.begin(), fast.end());
          CHECK(fast == bf::corona_children(ctx.f(), ctx.reducing(), j, lambda));
          auto ref = reference::corona_children(ctx, j, lambda);
          std::sort(ref.begin(), ref.end());
          CHECK(ref == fast);
        }
      }
    }
  }

  TEST_CASE("trivial decomposition passes") {
    const GridSpec g(1, 3, 2);
    const auto id = MatrixWeightField::identity(g);
    CellField f(g, FieldKind::vector);
    for (std::size_t x = 0; x < f.cells(); ++x) f.cell(x)[1] = 2.0;
    const StoppingContext ctx(id, 2.0, f);
    const auto dec = build_corona(ctx, kDefaultCoronaLambda);
    CHECK(dec.stopping.size() == 1);
    const auto check = verify_corona(dec, ctx);
    CHECK(check.passed());
    CHECK(check.worst_control == doctest::Approx(1.0));
  }

  TEST_CASE("decompositions partition the cubes and satisfy the checks") {
    for (int trial = 0; trial < 4; ++trial) {
      const auto owner = random_context(1 + trial % 2, trial % 2 ? 4 : 7, 1 + trial % 3, 2.0, 100 + trial, 1.0);
      const StoppingContext& ctx = owner->ctx;
      const auto dec = build_corona(ctx, kDefaultCoronaLambda);
      const auto check = verify_corona(dec, ctx);
      CHECK(check.packing);
      CHECK(check.worst_packing <= 0.25);
      CHECK(check.partition);
      CHECK(check.partition_violations == 0);
      CHECK(check.control);
      const int n = ctx.grid().vector_dim();
      CHECK(check.control_limit == doctest::Approx(64.0 * reducing_constant(n, 1e-6)));
      CHECK(check.worst_control <= check.control_limit);
      for (std::int64_t b : dec.block) CHECK(b >= 0);
    }
  }
}
