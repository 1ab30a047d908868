#include "doctest.h"

#include "qcompat/matrix.hpp"
#include "qcompat/povm.hpp"
#include "qcompat/rng.hpp"

using namespace qcompat;

namespace {

Povm computational_basis(int d) {
  Povm p;
  p.dim = d;
  for (int i = 0; i < d; ++i) {
    ComplexMatrix e = ComplexMatrix::Zero(d, d);
    e(i, i) = 1.0;
    p.effects.push_back(e);
  }
  return p;
}

Povm pauli_x_basis() {
  ComplexMatrix h(2, 2);
  h << 1, 1, 1, -1;
  h /= std::sqrt(2.0);
  return von_neumann_povm(h);
}

// The two measurements from the five-dimensional worked example: the
// computational basis, and the basis {(e1 +- e2)/sqrt2, (e3 +- e4)/sqrt2, e5}.
PovmTuple example5_tuple() {
  const int d = 5;
  PovmTuple t;
  t.dim = d;
  t.povms.push_back(computational_basis(d));
  ComplexMatrix b = ComplexMatrix::Zero(d, d);
  const double s = 1.0 / std::sqrt(2.0);
  b(0, 0) = s;  b(1, 0) = s;
  b(0, 1) = s;  b(1, 1) = -s;
  b(2, 2) = s;  b(3, 2) = s;
  b(2, 3) = s;  b(3, 3) = -s;
  b(4, 4) = 1.0;
  t.povms.push_back(von_neumann_povm(b));
  return t;
}

Isometry pick_columns(int d, std::initializer_list<int> cols) {
  ComplexMatrix v = ComplexMatrix::Zero(d, static_cast<int>(cols.size()));
  int j = 0;
  for (int c : cols) v(c, j++) = 1.0;
  return Isometry(v);
}

JointPovm random_joint_povm(const std::vector<int>& shape, int d, Rng& rng) {
  JointPovm joint;
  joint.dim = d;
  joint.shape = shape;
  int total = 1;
  for (int k : shape) total *= k;
  ComplexMatrix sum = ComplexMatrix::Zero(d, d);
  std::vector<ComplexMatrix> raw;
  for (int i = 0; i < total; ++i) {
    ComplexMatrix g(d, d);
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) g(r, c) = rng.complex_gaussian();
    raw.push_back(g * g.adjoint());
    sum += raw.back();
  }
  auto eig = eig_hermitian(sum);
  const ComplexMatrix inv_sqrt =
      eig.vectors * eig.values.cwiseSqrt().cwiseInverse().asDiagonal() *
      eig.vectors.adjoint();
  for (auto& e : raw) joint.effects.push_back(hermitize(inv_sqrt * e * inv_sqrt));
  return joint;
}

}  // namespace

TEST_CASE("validate accepts projective and flags unnormalized POVMs") {
  CHECK(validate(computational_basis(3)).ok);

  Povm bad;
  bad.dim = 2;
  for (int i = 0; i < 3; ++i)
    bad.effects.push_back(0.5 * ComplexMatrix::Identity(2, 2));
  auto rep = validate(bad);
  CHECK_FALSE(rep.ok);
  CHECK(rep.sum_residual == doctest::Approx(0.5));
  CHECK(rep.psd_violation <= 1e-15);

  // the qutrit effect pair E, I - E
  ComplexMatrix e = ComplexMatrix::Zero(3, 3);
  e(0, 0) = 1.0;
  e(1, 1) = 0.5;
  Povm pair;
  pair.dim = 3;
  pair.effects = {e, ComplexMatrix::Identity(3, 3) - e};
  CHECK(validate(pair).ok);
}

TEST_CASE("apply_noise endpoints and the qubit example") {
  Povm z = computational_basis(2);
  Povm same = apply_noise(z, 1.0);
  CHECK(max_abs(same.effects[0] - z.effects[0]) == 0.0);

  Povm trivial = apply_noise(z, 0.0);
  CHECK(max_abs(trivial.effects[0] - 0.5 * ComplexMatrix::Identity(2, 2)) <=
        1e-15);

  Povm half = apply_noise(z, 0.5);
  CHECK(half.effects[0](0, 0).real() == doctest::Approx(0.75));
  CHECK(half.effects[0](1, 1).real() == doctest::Approx(0.25));
  CHECK(half.effects[1](0, 0).real() == doctest::Approx(0.25));
  CHECK(half.effects[1](1, 1).real() == doctest::Approx(0.75));

  CHECK_THROWS_AS(apply_noise(z, 1.5), std::invalid_argument);
  PovmTuple t;
  t.dim = 2;
  t.povms = {z};
  CHECK_THROWS_AS(apply_noise(t, {0.2, 0.3}), std::invalid_argument);
}

TEST_CASE("reduce by a unitary preserves spectra") {
  Rng rng(11);
  PovmTuple t = example5_tuple();
  const Isometry u = haar_isometry(5, 5, 123);
  PovmTuple rotated = reduce(t, u);
  for (int x = 0; x < t.count(); ++x) {
    for (int i = 0; i < t.povms[x].outcomes(); ++i) {
      auto before = eig_hermitian(t.povms[x].effects[i]).values;
      auto after = eig_hermitian(rotated.povms[x].effects[i]).values;
      CHECK((before - after).cwiseAbs().maxCoeff() <= 1e-10);
    }
  }
}

TEST_CASE("reduction of the worked example by V commutes") {
  PovmTuple t = example5_tuple();
  const Isometry v = pick_columns(5, {0, 2, 4});
  PovmTuple red = reduce(t, v);

  // V*BV = (|1><1|/2, |1><1|/2, |2><2|/2, |2><2|/2, |3><3|)
  const auto& b = red.povms[1];
  ComplexMatrix p1 = ComplexMatrix::Zero(3, 3);
  p1(0, 0) = 0.5;
  CHECK(max_abs(b.effects[0] - p1) <= 1e-12);
  CHECK(max_abs(b.effects[1] - p1) <= 1e-12);
  ComplexMatrix p2 = ComplexMatrix::Zero(3, 3);
  p2(1, 1) = 0.5;
  CHECK(max_abs(b.effects[2] - p2) <= 1e-12);
  CHECK(max_abs(b.effects[3] - p2) <= 1e-12);
  ComplexMatrix p3 = ComplexMatrix::Zero(3, 3);
  p3(2, 2) = 1.0;
  CHECK(max_abs(b.effects[4] - p3) <= 1e-12);

  for (const auto& p : red.povms) CHECK(validate(p).ok);
  CHECK(pairwise_commutator_norm(red) <= 1e-12);
}

TEST_CASE("reduction of the worked example by W does not commute") {
  PovmTuple t = example5_tuple();
  const Isometry w = pick_columns(5, {0, 1, 4});
  PovmTuple red = reduce(t, w);
  ComplexMatrix expect(3, 3);
  expect << 0.5, 0.5, 0, 0.5, 0.5, 0, 0, 0, 0;
  CHECK(max_abs(red.povms[1].effects[0] - expect) <= 1e-12);
  CHECK(pairwise_commutator_norm(red) > 0.4);

  CHECK_THROWS_AS(reduce(t, pick_columns(4, {0, 1})), std::invalid_argument);
}

TEST_CASE("marginals of a product joint POVM") {
  Povm a = pauli_x_basis();
  JointPovm joint;
  joint.dim = 2;
  joint.shape = {2, 3};
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 3; ++j) {
      joint.effects.push_back(a.effects[i] / 3.0);
    }
  }
  Povm m0 = marginal(joint, 0);
  for (int i = 0; i < 2; ++i) {
    CHECK(max_abs(m0.effects[i] - a.effects[i]) <= 1e-14);
  }
  Povm m1 = marginal(joint, 1);
  CHECK(validate(m1).ok);
  CHECK_THROWS_AS(marginal(joint, 2), std::out_of_range);

  // g = 1: the marginal is the POVM itself
  JointPovm single;
  single.dim = 2;
  single.shape = {2};
  single.effects = a.effects;
  Povm same = marginal(single, 0);
  CHECK(max_abs(same.effects[0] - a.effects[0]) == 0.0);
}

TEST_CASE("random joint POVMs have valid marginals") {
  Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    JointPovm joint = random_joint_povm({2, 2}, 2, rng);
    CHECK(validate(joint).ok);
    CHECK(validate(marginal(joint, 0)).ok);
    CHECK(validate(marginal(joint, 1)).ok);
  }
}

TEST_CASE("pairwise commutator norms") {
  PovmTuple diag;
  diag.dim = 3;
  diag.povms = {computational_basis(3), computational_basis(3)};
  CHECK(pairwise_commutator_norm(diag) == 0.0);

  PovmTuple zx;
  zx.dim = 2;
  zx.povms = {computational_basis(2), pauli_x_basis()};
  const double norm = pairwise_commutator_norm(zx);
  CHECK(norm > 0.4);
  CHECK(norm == doctest::Approx(0.5));
}

TEST_CASE("noise and reduction commute") {
  Rng rng(23);
  PovmTuple t = example5_tuple();
  for (int trial = 0; trial < 20; ++trial) {
    const Isometry v = haar_isometry(5, 2 + trial % 3, 1000 + trial);
    const std::vector<double> noise = {rng.uniform(), rng.uniform()};
    PovmTuple a = reduce(apply_noise(t, noise), v);
    PovmTuple b = apply_noise(reduce(t, v), noise);
    for (int x = 0; x < 2; ++x) {
      for (int i = 0; i < 5; ++i) {
        CHECK(max_abs(a.povms[x].effects[i] - b.povms[x].effects[i]) <= 1e-12);
      }
    }
  }
}

TEST_CASE("joint_from_commuting reproduces marginals") {
  PovmTuple t = example5_tuple();
  PovmTuple red = reduce(t, pick_columns(5, {0, 2, 4}));
  JointPovm joint = joint_from_commuting(red);
  CHECK(validate(joint).ok);
  for (int x = 0; x < red.count(); ++x) {
    Povm m = marginal(joint, x);
    for (int i = 0; i < m.outcomes(); ++i) {
      CHECK(max_abs(m.effects[i] - red.povms[x].effects[i]) <= 1e-10);
    }
  }
  CHECK_THROWS_AS(joint_from_commuting(t), std::invalid_argument);
}
