#pragma once

// Common measurement fixtures used across the test suites.

#include <cmath>

#include "qcompat/matrix.hpp"
#include "qcompat/povm.hpp"

namespace fixtures {

using namespace qcompat;

inline ComplexMatrix fourier(int d) {
  ComplexMatrix f(d, d);
  const double w = 2.0 * M_PI / d;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      f(a, b) = std::polar(1.0 / std::sqrt(double(d)), w * a * b);
  return f;
}

inline Povm computational_basis(int d) {
  return von_neumann_povm(ComplexMatrix::Identity(d, d));
}

inline Povm fourier_basis(int d) { return von_neumann_povm(fourier(d)); }

inline PovmTuple comp_fourier_tuple(int d) {
  PovmTuple t;
  t.dim = d;
  t.povms = {computational_basis(d), fourier_basis(d)};
  return t;
}

// noisy computational + Fourier pair
inline PovmTuple noisy_mub_pair(int d, double lambda, double mu) {
  return apply_noise(comp_fourier_tuple(d), {lambda, mu});
}

// The five-dimensional worked example: computational basis vs the basis
// {(e1 +- e2)/sqrt2, (e3 +- e4)/sqrt2, e5}.
inline PovmTuple example5_tuple() {
  const int d = 5;
  ComplexMatrix b = ComplexMatrix::Zero(d, d);
  const double s = 1.0 / std::sqrt(2.0);
  b(0, 0) = s;  b(1, 0) = s;
  b(0, 1) = s;  b(1, 1) = -s;
  b(2, 2) = s;  b(3, 2) = s;
  b(2, 3) = s;  b(3, 3) = -s;
  b(4, 4) = 1.0;
  PovmTuple t;
  t.dim = d;
  t.povms = {computational_basis(d), von_neumann_povm(b)};
  return t;
}

// Qutrit projector pair built from the computational and Fourier bases; its
// pair-effect program value is 1 + 1/sqrt(3) ~ 1.577.
inline std::pair<ComplexMatrix, ComplexMatrix> qutrit_projector_pair() {
  ComplexMatrix e = ComplexMatrix::Zero(3, 3);
  e(0, 0) = 1.0;
  e(1, 1) = 1.0;
  const ComplexMatrix f3 = fourier(3);
  const ComplexMatrix f = hermitize(f3.col(0) * f3.col(0).adjoint() +
                                    f3.col(1) * f3.col(1).adjoint());
  return {e, f};
}

// The same construction with weights (1, 1/2); this is the variant whose
// reductions by the explicit isometry below are diag(1, 1/4) and I/2.
inline std::pair<ComplexMatrix, ComplexMatrix> qutrit_halved_pair() {
  ComplexMatrix e = ComplexMatrix::Zero(3, 3);
  e(0, 0) = 1.0;
  e(1, 1) = 0.5;
  const ComplexMatrix f3 = fourier(3);
  const ComplexMatrix f = hermitize(f3.col(0) * f3.col(0).adjoint() +
                                    0.5 * (f3.col(1) * f3.col(1).adjoint()));
  return {e, f};
}

// V = [[1, 0], [0, 1/sqrt2], [0, w/sqrt2]] with w = exp(2 pi i / 3)
inline Isometry qutrit_reduction_isometry() {
  ComplexMatrix v = ComplexMatrix::Zero(3, 2);
  v(0, 0) = 1.0;
  v(1, 1) = 1.0 / std::sqrt(2.0);
  v(2, 1) = std::polar(1.0 / std::sqrt(2.0), 2.0 * M_PI / 3.0);
  return Isometry(v);
}

inline Isometry pick_columns(int d, std::initializer_list<int> cols) {
  ComplexMatrix v = ComplexMatrix::Zero(d, static_cast<int>(cols.size()));
  int j = 0;
  for (int c : cols) v(c, j++) = 1.0;
  return Isometry(v);
}

inline PovmTuple effects_to_tuple(int dim,
                                  const std::vector<ComplexMatrix>& effects) {
  PovmTuple t;
  t.dim = dim;
  for (const auto& e : effects) {
    Povm p;
    p.dim = dim;
    p.effects = {e, ComplexMatrix::Identity(dim, dim) - e};
    t.povms.push_back(std::move(p));
  }
  return t;
}

}  // namespace fixtures
