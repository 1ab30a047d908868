#include "doctest.h"

#include <cmath>

#include "fixtures.hpp"
#include "qcompat/compat.hpp"
#include "qcompat/constructions.hpp"
#include "qcompat/rng.hpp"

using namespace qcompat;
using namespace fixtures;

TEST_CASE("fourier matrices") {
  CHECK(fourier_matrix(1)(0, 0) == Complex(1.0, 0.0));

  const ComplexMatrix f3 = fourier_matrix(3);
  const Complex w = std::polar(1.0, 2.0 * M_PI / 3.0);
  CHECK(max_abs(f3 * std::sqrt(3.0) -
                (ComplexMatrix(3, 3) << 1, 1, 1, 1, w, w * w, 1, w * w, w)
                    .finished()) <= 1e-12);

  // eigenvalue-1 eigenspace of F4 has dimension 1 + floor(4/4) = 2
  const ComplexMatrix f4 = fourier_matrix(4);
  auto k = kernel(ComplexMatrix::Identity(4, 4) - f4, 1e-10);
  CHECK(k.dim() == 2);
}

TEST_CASE("mub families for prime dimensions") {
  auto qubit = mub_family(2, 3);
  CHECK(qubit.unbiasedness_defect() <= 1e-12);
  // eigenbases of sigma_Z, sigma_X, sigma_Y in that order
  CHECK(max_abs(qubit.bases[0] - ComplexMatrix::Identity(2, 2)) == 0.0);
  CHECK(qubit.bases[1](1, 1).real() == doctest::Approx(-1.0 / std::sqrt(2.0)));
  CHECK(qubit.bases[2](1, 0).imag() == doctest::Approx(1.0 / std::sqrt(2.0)));

  auto qutrit = mub_family(3, 3);
  CHECK(qutrit.unbiasedness_defect() <= 1e-9);
  CHECK(max_abs(qutrit.bases[1] - fourier_matrix(3)) <= 1e-12);

  auto five = mub_family(5, 3);
  CHECK(five.unbiasedness_defect() <= 1e-9);
  auto five_full = mub_family(5, 6);
  CHECK(five_full.unbiasedness_defect() <= 1e-9);

  CHECK_THROWS_AS(mub_family(4, 3), std::invalid_argument);
  CHECK_THROWS_AS(mub_family(3, 5), std::invalid_argument);
}

TEST_CASE("zeta bound: identity and eigenvalue multiplicities") {
  auto id = zeta_lower_bound(ComplexMatrix::Identity(4, 4));
  CHECK(id.bound == 4);

  ComplexMatrix u = ComplexMatrix::Identity(3, 3);
  u(2, 2) = std::polar(1.0, 0.7);
  auto mult = zeta_lower_bound(u, ZetaStrategy::EigenvalueClusters);
  CHECK(mult.bound == 2);

  ComplexMatrix not_unitary = 2.0 * ComplexMatrix::Identity(2, 2);
  CHECK_THROWS_AS(zeta_lower_bound(not_unitary), std::invalid_argument);
}

TEST_CASE("zeta bound on the Fourier matrix certifies the known subspace") {
  const ComplexMatrix f4 = fourier_matrix(4);
  auto cert = zeta_lower_bound(f4, ZetaStrategy::EigenvalueClusters);
  CHECK(cert.bound >= 2);
  ComplexVector v1(4), v2(4);
  v1 << 1, 0, 1, 0;
  v2 << 2, 1, 0, 1;
  CHECK(cert.subspace.distance(v1.normalized()) <= 1e-7);
  CHECK(cert.subspace.distance(v2.normalized()) <= 1e-7);
  CHECK(zeta_certificate_defect(f4, cert) <= 1e-7);

  // the reduced two-basis tuple on the certified subspace is compatible
  PovmTuple pair = comp_fourier_tuple(4);
  const auto report =
      joint_measurability(reduce(pair, cert.subspace.isometry()));
  CHECK(report.verdict == CompatVerdict::Compatible);
}

TEST_CASE("exhaustive permutation strategy can only improve") {
  Rng rng(3);
  ComplexMatrix g(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) g(i, j) = rng.complex_gaussian();
  const ComplexMatrix u = orthonormalize(g);
  auto a = zeta_lower_bound(u, ZetaStrategy::EigenvalueClusters);
  auto all = zeta_lower_bound(u, ZetaStrategy::All);
  CHECK(all.bound >= a.bound);
  CHECK(zeta_certificate_defect(u, all) <= 1e-7);
}

TEST_CASE("spin systems satisfy the Clifford relations exactly") {
  auto one = spin_system(1);
  REQUIRE(one.matrices.size() == 3);
  CHECK(one.matrices[0](0, 1) == Complex(1.0, 0.0));   // sigma_X
  CHECK(one.matrices[1](1, 0) == Complex(0.0, 1.0));   // sigma_Y
  CHECK(one.matrices[2](1, 1) == Complex(-1.0, 0.0));  // sigma_Z

  auto two = spin_system(2);
  REQUIRE(two.matrices.size() == 5);
  ComplexMatrix sx(2, 2), sy(2, 2), sz(2, 2);
  sx << 0, 1, 1, 0;
  sy << 0, Complex(0, -1), Complex(0, 1), 0;
  sz << 1, 0, 0, -1;
  CHECK(max_abs(two.matrices[0] - kron(sx, sx)) == 0.0);
  CHECK(max_abs(two.matrices[1] - kron(sx, sy)) == 0.0);
  CHECK(max_abs(two.matrices[2] - kron(sx, sz)) == 0.0);
  CHECK(max_abs(two.matrices[3] - kron(sy, ComplexMatrix::Identity(2, 2))) ==
        0.0);
  CHECK(max_abs(two.matrices[4] - kron(sz, ComplexMatrix::Identity(2, 2))) ==
        0.0);

  for (int level : {1, 2, 3}) {
    auto sys = spin_system(level);
    const int dim = 1 << level;
    CHECK(static_cast<int>(sys.matrices.size()) == 2 * level + 1);
    const ComplexMatrix eye = ComplexMatrix::Identity(dim, dim);
    for (std::size_t i = 0; i < sys.matrices.size(); ++i) {
      const auto& fi = sys.matrices[i];
      CHECK(max_abs(fi - fi.adjoint()) == 0.0);
      CHECK(max_abs(fi * fi - eye) == 0.0);
      for (std::size_t j = i + 1; j < sys.matrices.size(); ++j) {
        const auto& fj = sys.matrices[j];
        CHECK(max_abs(fi * fj + fj * fi) == 0.0);  // exact anticommutation
      }
    }
  }
}

TEST_CASE("spin POVMs are projective and dichotomic") {
  auto tuple = spin_povms(2);
  CHECK(tuple.dim == 4);
  CHECK(tuple.count() == 5);
  for (const auto& p : tuple.povms) {
    CHECK(p.outcomes() == 2);
    CHECK(validate(p).ok);
    // projective: E^2 = E
    CHECK(max_abs(p.effects[0] * p.effects[0] - p.effects[0]) <= 1e-14);
  }
}

TEST_CASE("MUB truncation isometry and the reduced spectra") {
  auto fam = mub_family(5, 3);
  const Isometry full = mub_truncation_isometry(fam.bases[2], 5);
  CHECK(full.reduced_dim() == 5);

  const double lambda = 0.66;
  PovmTuple noisy;
  noisy.dim = 5;
  noisy.povms = {von_neumann_povm(fam.bases[0]), von_neumann_povm(fam.bases[1])};
  noisy = apply_noise(noisy, {lambda, lambda});

  const Isometry v = mub_truncation_isometry(fam.bases[2], 2);
  PovmTuple red = reduce(noisy, v);
  for (const auto& p : red.povms) {
    for (const auto& e : p.effects) {
      CHECK(min_eigenvalue(hermitize(e)) ==
            doctest::Approx((1.0 - lambda) / 5.0).epsilon(1e-9));
      CHECK(e.trace().real() == doctest::Approx(2.0 / 5.0).epsilon(1e-9));
    }
  }

  const Isometry line = mub_truncation_isometry(fam.bases[2], 1);
  CHECK(line.reduced_dim() == 1);
}

TEST_CASE("lambda intervals") {
  auto i25 = lambda_interval(2, 5);
  CHECK(i25.lo == doctest::Approx(0.6545084972).epsilon(1e-9));
  CHECK(i25.hi == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK_FALSE(i25.empty());
  CHECK(i25.contains(0.66));

  CHECK(lambda_interval(2, 4).empty());  // r = sqrt(d): endpoints coincide

  auto i316 = lambda_interval(3, 16);
  CHECK(i316.lo == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(i316.hi == doctest::Approx(0.625).epsilon(1e-12));

  CHECK_THROWS_AS(lambda_interval(1, 9), std::invalid_argument);
}

TEST_CASE("commutative reduction of diagonal effects") {
  std::vector<ComplexMatrix> effects;
  ComplexMatrix a = ComplexMatrix::Zero(4, 4), b = ComplexMatrix::Zero(4, 4);
  a.diagonal() << 0.1, 0.4, 0.9, 0.3;
  b.diagonal() << 0.7, 0.2, 0.5, 0.6;
  effects = {a, b};
  const Isometry v = commutative_reduction(effects, 2);
  for (const auto& e : effects) {
    const ComplexMatrix red = v.matrix().adjoint() * e * v.matrix();
    CHECK(std::abs(red(0, 1)) <= 1e-9);
  }
}

TEST_CASE("commutative reduction of the qutrit pair") {
  const auto [e, f] = qutrit_projector_pair();
  const Isometry v = commutative_reduction({e, f}, 2);
  const ComplexMatrix er = v.matrix().adjoint() * e * v.matrix();
  const ComplexMatrix fr = v.matrix().adjoint() * f * v.matrix();
  CHECK(spectral_norm(er * fr - fr * er) <= 1e-8);
  CHECK(pair_effect_value(er, fr) <= 1.0 + 1e-7);
}

TEST_CASE("commutative reduction on random qutrit pairs (boundary case)") {
  Rng rng(41);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<ComplexMatrix> effects;
    for (int k = 0; k < 2; ++k) {
      ComplexMatrix g(3, 3);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) g(i, j) = rng.complex_gaussian();
      const ComplexMatrix h = hermitize(g);
      auto eig = eig_hermitian(h);
      const double lo = eig.values(0), hi = eig.values(2);
      effects.push_back((h - lo * ComplexMatrix::Identity(3, 3)) / (hi - lo));
    }
    ReductionOptions opts;
    opts.seed = 100 + trial;
    const Isometry v = commutative_reduction(effects, 2, opts);
    for (int i = 0; i < 2; ++i) {
      for (const auto& a : effects) {
        const ComplexMatrix red = v.matrix().adjoint() * a * v.matrix();
        CHECK(std::abs(red(0, 1)) <= 1e-9);
      }
    }
  }
}

TEST_CASE("commutative reduction reports the feasible rank on failure") {
  // two generic qutrit effects cannot be reduced to r = 3 commuting ones
  const auto [e, f] = qutrit_projector_pair();
  CHECK_THROWS_WITH_AS(commutative_reduction({e, f}, 3),
                       doctest::Contains("precondition"),
                       std::invalid_argument);
}

TEST_CASE("explicit isometry trivializes the halved Fourier effect") {
  const auto [e, f] = qutrit_halved_pair();
  const Isometry v = qutrit_reduction_isometry();
  const ComplexMatrix er = v.matrix().adjoint() * e * v.matrix();
  const ComplexMatrix fr = v.matrix().adjoint() * f * v.matrix();
  ComplexMatrix expected_e(2, 2);
  expected_e << 1.0, 0.0, 0.0, 0.25;
  CHECK(max_abs(er - expected_e) <= 1e-12);
  CHECK(max_abs(fr - 0.5 * ComplexMatrix::Identity(2, 2)) <= 1e-12);
  // (F, I - F) reduces to the trivial POVM (I/2, I/2)
  const ComplexMatrix fr2 =
      v.matrix().adjoint() * (ComplexMatrix::Identity(3, 3) - f) * v.matrix();
  CHECK(max_abs(fr2 - 0.5 * ComplexMatrix::Identity(2, 2)) <= 1e-12);
}

TEST_CASE("scalar reduction") {
  // multiples of the identity: any isometry works
  std::vector<ComplexMatrix> trivial = {0.3 * ComplexMatrix::Identity(4, 4),
                                        0.8 * ComplexMatrix::Identity(4, 4)};
  auto triv = scalar_reduction(trivial, 2);
  CHECK(triv.scalars[0] == doctest::Approx(0.3));
  CHECK(triv.scalars[1] == doctest::Approx(0.8));

  // a single generic effect in d = 5 (strict regime) and d = 4 (boundary)
  Rng rng(7);
  for (int d : {5, 4}) {
    ComplexMatrix g(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) g(i, j) = rng.complex_gaussian();
    ComplexMatrix h = hermitize(g);
    auto eig = eig_hermitian(h);
    h = (h - eig.values(0) * ComplexMatrix::Identity(d, d)) /
        (eig.values(d - 1) - eig.values(0));
    auto red = scalar_reduction({h}, 2);
    const ComplexMatrix m =
        red.isometry.matrix().adjoint() * h * red.isometry.matrix();
    CHECK(max_abs(m - red.scalars[0] * ComplexMatrix::Identity(2, 2)) <= 1e-8);
  }
}

TEST_CASE("tverberg partitions") {
  // three collinear points split as {outer pair}, {middle}
  std::vector<RealVector> line(3, RealVector(1));
  line[0](0) = 0.0;
  line[1](0) = 1.0;
  line[2](0) = 2.0;
  auto t = tverberg_partition(line, 2);
  REQUIRE(t.parts.size() == 2);
  CHECK(t.point(0) == doctest::Approx(1.0).epsilon(1e-8));

  // r = 1: single part, centroid
  auto whole = tverberg_partition(line, 1);
  CHECK(whole.parts.size() == 1);
  CHECK(whole.point(0) == doctest::Approx(1.0));

  // four points in convex position: the diagonals intersect
  std::vector<RealVector> square(4, RealVector(2));
  square[0] << 0.0, 0.0;
  square[1] << 1.0, 0.0;
  square[2] << 1.0, 1.0;
  square[3] << 0.0, 1.0;
  auto s = tverberg_partition(square, 2);
  REQUIRE(s.parts.size() == 2);
  std::vector<int> diag = s.parts[0];
  CHECK(((diag == std::vector<int>{0, 2}) || (diag == std::vector<int>{1, 3})));
  CHECK(s.point(0) == doctest::Approx(0.5).epsilon(1e-7));
  CHECK(s.point(1) == doctest::Approx(0.5).epsilon(1e-7));
}

TEST_CASE("delta region membership for MUB tuples") {
  auto fam = mub_family(5, 3);
  CHECK(delta_region_member(fam, 2, 2, {0.0, 0.0}) == DeltaVerdict::Member);
  CHECK(delta_region_member(fam, 2, 2, {2.0 / 3.0, 2.0 / 3.0}) ==
        DeltaVerdict::Member);
  CHECK(delta_region_member(fam, 2, 2, {1.0, 1.0}) == DeltaVerdict::Unknown);
  CHECK_THROWS_AS(delta_region_member(fam, 3, 2, {0.1, 0.1, 0.1}),
                  std::invalid_argument);
}
