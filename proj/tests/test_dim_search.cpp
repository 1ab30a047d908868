#include "doctest.h"

#include <cmath>

#include "fixtures.hpp"
#include "qcompat/dim_search.hpp"

using namespace qcompat;
using namespace fixtures;

namespace {

SearchBudget small_budget() {
  SearchBudget b;
  b.restarts = 3;
  b.steps = 12;
  b.seed = 7;
  return b;
}

}  // namespace

TEST_CASE("the worked example certifies R >= 3 through structure") {
  PovmTuple t = example5_tuple();
  auto got = certify_R_at_least(t, 3, small_budget());
  REQUIRE(got.found);
  CHECK(got.provenance == "two-basis-kernel");
  // independent re-verification
  auto report = joint_measurability(reduce(t, *got.isometry));
  CHECK(report.verdict == CompatVerdict::Compatible);
}

TEST_CASE("monotone consistency: certificates truncate downward") {
  PovmTuple t = example5_tuple();
  auto got = certify_R_at_least(t, 3, small_budget());
  REQUIRE(got.found);
  for (int r = 2; r >= 1; --r) {
    Isometry v{got.isometry->matrix().leftCols(r)};
    CHECK(joint_measurability(reduce(t, v)).verdict ==
          CompatVerdict::Compatible);
  }
}

TEST_CASE("the worked example admits a rank-3 falsifier") {
  PovmTuple t = example5_tuple();
  auto got = falsify_Rbar_at_least(t, 3, small_budget());
  REQUIRE(got.found);
  auto report = joint_measurability(reduce(t, *got.isometry));
  CHECK(report.verdict == CompatVerdict::Incompatible);
  CHECK(got.best_objective < 1.0 - 1e-7);
}

TEST_CASE("compatible tuples certify immediately and never falsify") {
  PovmTuple t;
  t.dim = 3;
  t.povms = {computational_basis(3), computational_basis(3)};
  for (int r = 1; r <= 3; ++r) {
    auto got = certify_R_at_least(t, r, small_budget());
    CHECK(got.found);
    CHECK(got.provenance == "tuple-compatible");
  }
  auto fal = search_falsify(t, 2, small_budget());
  CHECK_FALSE(fal.found);
}

TEST_CASE("rank one always certifies; identity falsifies incompatible") {
  PovmTuple zx = comp_fourier_tuple(2);
  auto one = certify_R_at_least(zx, 1, small_budget());
  CHECK(one.found);

  auto top = falsify_Rbar_at_least(zx, 2, small_budget());
  REQUIRE(top.found);
  CHECK(top.provenance == "identity");
}

TEST_CASE("determinism: identical budgets and seeds give identical results") {
  PovmTuple t = example5_tuple();
  SearchBudget b = small_budget();
  auto a1 = falsify_Rbar_at_least(t, 3, b);
  auto a2 = falsify_Rbar_at_least(t, 3, b);
  REQUIRE(a1.found);
  REQUIRE(a2.found);
  CHECK(max_abs(a1.isometry->matrix() - a2.isometry->matrix()) == 0.0);
  CHECK(a1.evaluations == a2.evaluations);
}

TEST_CASE("randomized search finds open certificate sets") {
  // With enough noise the commuting subspaces of the worked example fatten
  // into an open set the hill climber can land in.
  PovmTuple t = apply_noise(example5_tuple(), {0.85, 0.85});
  CHECK(joint_measurability(t).verdict == CompatVerdict::Incompatible);
  SearchBudget b;
  b.restarts = 6;
  b.steps = 40;
  b.seed = 3;
  auto got = search_certify(t, 2, b);
  REQUIRE(got.found);
  CHECK(joint_measurability(reduce(t, *got.isometry)).verdict ==
        CompatVerdict::Compatible);
}

TEST_CASE("noise-content bookkeeping for strong lower bounds") {
  // sharp tuples carry no usable noise
  CHECK(rbar_lower_from_noise_content(example5_tuple()) == 1);

  // spin level-1 at t = 0.25: N_t[B] with t <= 1/(2r) gives r = 2
  PovmTuple spin1 = spin_povms(1);
  CHECK(rbar_lower_from_noise_content(apply_noise(spin1, {.25, .25, .25})) ==
        2);
}

TEST_CASE("spin bound bookkeeping at desk-breaking sizes") {
  auto b = spin_noise_bounds(9, 0.24);
  CHECK(b.r_bar_lower.value == 2);
  CHECK(b.r_bar_upper.value == (1 << 9) - 1);

  auto c = spin_noise_bounds(1, 0.5);  // ||t||_2 = 0.87 <= 1: compatible
  CHECK(c.r_bar_upper.value == 2);
  CHECK(c.r_lower.value == 2);
}

TEST_CASE("bounds summary on the worked example") {
  SearchBudget b;
  b.restarts = 2;
  b.steps = 10;
  b.seed = 1;
  PovmTuple t = example5_tuple();
  auto bounds = bounds_summary(t, b);
  CHECK(bounds.r_lower.value == 3);
  CHECK(bounds.r_lower.provenance == "two-basis-kernel");
  CHECK(bounds.r_bar_lower.value == 1);
  CHECK(bounds.r_bar_upper.value <= 2);
  CHECK(bounds.r_bar_lower.value <= bounds.r_bar_upper.value);
  CHECK(bounds.hash == tuple_hash(t));

  PovmTuple same;
  same.dim = 2;
  same.povms = {computational_basis(2), computational_basis(2)};
  auto triv = bounds_summary(same, b);
  CHECK(triv.r_lower.value == 2);
  CHECK(triv.r_bar_upper.value == 2);
}

TEST_CASE("mub metadata unlocks the truncation certificate") {
  auto fam = mub_family(5, 3);
  PovmTuple t;
  t.dim = 5;
  t.povms = {von_neumann_povm(fam.bases[0]), von_neumann_povm(fam.bases[1])};
  const double lambda = 0.66;
  t = apply_noise(t, {lambda, lambda});
  TupleMetadata meta;
  meta.mub = MubMetadata{fam.bases, {lambda, lambda}};
  t.metadata = meta;

  auto got = certify_R_at_least(t, 2, small_budget());
  REQUIRE(got.found);
  CHECK(got.provenance == "mub-truncation");
  CHECK(joint_measurability(reduce(t, *got.isometry)).verdict ==
        CompatVerdict::Compatible);
}
