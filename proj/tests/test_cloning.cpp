#include "doctest.h"

#include <cmath>

#include "qcompat/cloning.hpp"
#include "qcompat/rng.hpp"

using namespace qcompat;

TEST_CASE("boundary residual vanishes at the symmetric optimum") {
  // s = (d+2)/(2(d+1)) is on the boundary for g = 2; both sides equal
  // 2d(d+1) there.
  for (int d = 2; d <= 6; ++d) {
    const double s = (d + 2.0) / (2.0 * (d + 1.0));
    CHECK(std::abs(boundary_residual({2, d, {s, s}})) <= 1e-9);
  }
}

TEST_CASE("boundary residual signs") {
  CHECK(boundary_residual({2, 2, {1.0, 1.0}}) > 0.0);   // no perfect clones
  CHECK(boundary_residual({2, 2, {0.5, 0.5}}) < 0.0);   // strictly inside
  CHECK(std::abs(boundary_residual({2, 3, {0.625, 0.625}})) <= 1e-9);
}

TEST_CASE("in_gamma_clone membership by ray scaling") {
  auto zero = in_gamma_clone({2, 2, {0.0, 0.0}});
  CHECK(zero.member);
  CHECK(zero.method == CloneMethod::Trivial);

  auto inside = in_gamma_clone({2, 2, {0.66, 0.66}});
  CHECK(inside.member);
  CHECK(inside.alpha_star == doctest::Approx((2.0 / 3.0) / 0.66).epsilon(1e-6));

  auto outside = in_gamma_clone({2, 2, {0.7, 0.7}});
  CHECK_FALSE(outside.member);
  CHECK(outside.alpha_star < 1.0);

  CHECK_THROWS_AS(in_gamma_clone({2, 2, {0.5}}), std::invalid_argument);
}

TEST_CASE("choi oracle on the canonical points") {
  auto boundary = clone_choi_feasible({2, 2, {2.0 / 3.0, 2.0 / 3.0}});
  CHECK(boundary.verdict == FeasVerdict::Feasible);

  auto perfect = clone_choi_feasible({2, 2, {1.0, 1.0}});
  CHECK(perfect.verdict == FeasVerdict::Infeasible);

  auto one_arm = clone_choi_feasible({2, 2, {1.0, 0.0}});
  CHECK(one_arm.verdict == FeasVerdict::Feasible);
}

TEST_CASE("oracle agreement away from the boundary (g=2, d=2)") {
  const int n = 7;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double s1 = i / (n - 1.0), s2 = j / (n - 1.0);
      CloneParams p{2, 2, {s1, s2}};
      const auto analytic = in_gamma_clone(p);
      if (analytic.method == CloneMethod::BoundaryBisection &&
          std::abs(analytic.alpha_star - 1.0) * std::max(s1, s2) <= 1e-3) {
        continue;  // too close to the boundary to compare verdicts
      }
      const auto oracle = clone_choi_feasible(p);
      REQUIRE(oracle.verdict != FeasVerdict::Undecided);
      CHECK(analytic.member == (oracle.verdict == FeasVerdict::Feasible));
    }
  }
}

TEST_CASE("the region is a down-set (via the choi oracle)") {
  Rng rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    // random member: scale a boundary-ish point inward
    const double a = 0.2 + 0.45 * rng.uniform();
    const double b = 0.2 + 0.45 * rng.uniform();
    CloneParams p{2, 2, {a, b}};
    if (!in_gamma_clone(p).member) continue;
    CloneParams q{2, 2, {a * rng.uniform(), b * rng.uniform()}};
    const auto oracle = clone_choi_feasible(q);
    CHECK(oracle.verdict == FeasVerdict::Feasible);
  }
}

TEST_CASE("feasible cloners satisfy the dual (unital) marginal conditions") {
  Rng rng(77);
  for (const auto& s : {std::vector<double>{2.0 / 3.0, 2.0 / 3.0},
                        std::vector<double>{0.5, 0.3}}) {
    const auto choi = clone_choi_feasible({2, 2, s});
    REQUIRE(choi.verdict == FeasVerdict::Feasible);
    // Psi(I^{j-1} x X x I^{g-j}) = s_j X + (1 - s_j) Tr[X]/d I
    for (int arm = 0; arm < 2; ++arm) {
      ComplexMatrix x(2, 2);
      for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) x(r, c) = rng.complex_gaussian();
      x = hermitize(x);
      const ComplexMatrix lifted =
          arm == 0 ? kron(x, ComplexMatrix::Identity(2, 2))
                   : kron(ComplexMatrix::Identity(2, 2), x);
      const ComplexMatrix psi = choi_adjoint_apply(choi.choi, 2, 2, lifted);
      const ComplexMatrix expected =
          s[arm] * x + (1.0 - s[arm]) * x.trace().real() / 2.0 *
                           ComplexMatrix::Identity(2, 2);
      CHECK(max_abs(psi - expected) <= 1e-6);
    }
  }
}
