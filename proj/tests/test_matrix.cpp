#include "doctest.h"

#include <complex>

#include "qcompat/matrix.hpp"
#include "qcompat/rng.hpp"

using namespace qcompat;

namespace {

ComplexMatrix pauli_z() {
  ComplexMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

ComplexMatrix pauli_x() {
  ComplexMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

ComplexMatrix fourier(int d) {
  ComplexMatrix f(d, d);
  const double w = 2.0 * M_PI / d;
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b) {
      f(a, b) = std::polar(1.0 / std::sqrt(double(d)), w * a * b);
    }
  }
  return f;
}

ComplexMatrix random_hermitian(int d, Rng& rng) {
  ComplexMatrix g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = rng.complex_gaussian();
  return hermitize(g);
}

}  // namespace

TEST_CASE("eig_hermitian on known spectra") {
  auto id3 = eig_hermitian(ComplexMatrix::Identity(3, 3));
  for (int i = 0; i < 3; ++i) CHECK(id3.values(i) == doctest::Approx(1.0));

  auto z = eig_hermitian(pauli_z());
  CHECK(z.values(0) == doctest::Approx(-1.0));
  CHECK(z.values(1) == doctest::Approx(1.0));

  auto half = eig_hermitian(0.5 * (ComplexMatrix::Identity(2, 2) + pauli_x()));
  CHECK(half.values(0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(half.values(1) == doctest::Approx(1.0));
}

TEST_CASE("eig_hermitian rejects non-Hermitian input") {
  ComplexMatrix m(2, 2);
  m << 1, 2, 3, 4;
  CHECK_THROWS_AS(eig_hermitian(m), std::invalid_argument);
}

TEST_CASE("eig_hermitian reconstruction residual") {
  Rng rng(7);
  for (int d : {2, 5, 17, 40}) {
    const ComplexMatrix m = random_hermitian(d, rng);
    auto eig = eig_hermitian(m);
    const ComplexMatrix rebuilt = eig.vectors *
                                  eig.values.asDiagonal() *
                                  eig.vectors.adjoint();
    CHECK(max_abs(m - rebuilt) <= 1e-9 * d);
    for (int i = 0; i + 1 < d; ++i) CHECK(eig.values(i) <= eig.values(i + 1));
  }
}

TEST_CASE("kernel of the zero matrix is everything") {
  auto k = kernel(ComplexMatrix::Zero(3, 3), 1e-10);
  CHECK(k.dim() == 3);
}

TEST_CASE("kernel of I - F4 is two dimensional") {
  const ComplexMatrix m = ComplexMatrix::Identity(4, 4) - fourier(4);
  auto k = kernel(m, 1e-10);
  CHECK(k.dim() == 2);
  ComplexVector v1(4), v2(4);
  v1 << 1, 0, 1, 0;
  v2 << 2, 1, 0, 1;
  CHECK(k.distance(v1.normalized()) <= 1e-9);
  CHECK(k.distance(v2.normalized()) <= 1e-9);
}

TEST_CASE("kernel of diag(1,0,0)") {
  ComplexMatrix m = ComplexMatrix::Zero(3, 3);
  m(0, 0) = 1.0;
  auto k = kernel(m, 1e-10);
  CHECK(k.dim() == 2);
  ComplexVector e2 = ComplexVector::Zero(3), e3 = ComplexVector::Zero(3);
  e2(1) = 1.0;
  e3(2) = 1.0;
  CHECK(k.distance(e2) <= 1e-12);
  CHECK(k.distance(e3) <= 1e-12);
}

TEST_CASE("kernel columns satisfy the residual bound") {
  Rng rng(3);
  for (int trial = 0; trial < 25; ++trial) {
    const int d = 3 + static_cast<int>(rng.integer() % 5);
    ComplexMatrix m(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) m(i, j) = rng.complex_gaussian();
    // force some rank deficiency half of the time
    if (trial % 2 == 0) m.col(d - 1) = m.col(0);
    const double tol = 1e-8;
    auto k = kernel(m, tol);
    const double norm = spectral_norm(m);
    for (int c = 0; c < k.dim(); ++c) {
      CHECK((m * k.basis.col(c)).norm() <= 2.0 * tol * norm);
    }
  }
}

TEST_CASE("haar_isometry is an isometry and deterministic per seed") {
  const Isometry v = haar_isometry(5, 2, 42);
  const ComplexMatrix gram = v.matrix().adjoint() * v.matrix();
  CHECK(max_abs(gram - ComplexMatrix::Identity(2, 2)) <= 1e-10);

  const Isometry u = haar_isometry(3, 3, 9);
  CHECK(max_abs(u.matrix() * u.matrix().adjoint() -
                ComplexMatrix::Identity(3, 3)) <= 1e-10);

  const Isometry v2 = haar_isometry(5, 2, 42);
  CHECK(max_abs(v.matrix() - v2.matrix()) == 0.0);

  CHECK_THROWS_AS(haar_isometry(2, 3, 0), std::invalid_argument);
}

TEST_CASE("haar_isometry stays orthonormal across sizes up to 64") {
  for (int d : {2, 7, 16, 33, 64}) {
    for (int r : {1, d / 2 > 0 ? d / 2 : 1, d}) {
      const Isometry v = haar_isometry(d, r, 1000 + d + r);
      const ComplexMatrix gram = v.matrix().adjoint() * v.matrix();
      CHECK(max_abs(gram - ComplexMatrix::Identity(r, r)) <= 1e-10);
    }
  }
}

TEST_CASE("haar_isometry first-entry moment matches 1/d") {
  const int trials = 10000;
  double acc = 0.0;
  for (int seed = 0; seed < trials; ++seed) {
    acc += std::norm(haar_isometry(4, 1, seed).matrix()(0, 0));
  }
  CHECK(acc / trials == doctest::Approx(0.25).epsilon(0.08));
}

TEST_CASE("haar_isometry distribution is left-invariant (statistically)") {
  // |<e1, U V e1>|^2 should have the same mean 1/d as |<e1, V e1>|^2.
  const ComplexMatrix u = fourier(4);
  const int trials = 4000;
  double acc = 0.0;
  for (int seed = 0; seed < trials; ++seed) {
    acc += std::norm((u * haar_isometry(4, 1, seed).matrix())(0, 0));
  }
  CHECK(acc / trials == doctest::Approx(0.25).epsilon(0.1));
}

TEST_CASE("orthonormal_complement basics") {
  ComplexVector e1 = ComplexVector::Zero(3);
  e1(0) = 1.0;
  auto c = orthonormal_complement({e1}, 3);
  CHECK(c.dim() == 2);
  CHECK(c.distance(ComplexVector::Unit(3, 1)) <= 1e-12);
  CHECK(c.distance(ComplexVector::Unit(3, 2)) <= 1e-12);

  auto full = orthonormal_complement({}, 2);
  CHECK(full.dim() == 2);

  ComplexVector sum = ComplexVector::Zero(3);
  sum(0) = 1.0;
  sum(1) = 1.0;
  auto line = orthonormal_complement({e1, sum}, 3);
  CHECK(line.dim() == 1);
  CHECK(line.distance(ComplexVector::Unit(3, 2)) <= 1e-12);
}

TEST_CASE("isometry validation") {
  ComplexMatrix bad(3, 2);
  bad << 1, 0, 0, 1, 0.1, 0;
  CHECK_THROWS_AS(Isometry{bad}, std::invalid_argument);
}
