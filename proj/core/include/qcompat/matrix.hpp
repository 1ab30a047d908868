#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <vector>

#include "qcompat/tolerances.hpp"

namespace qcompat {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

bool is_hermitian(const ComplexMatrix& m, double tol);

// (M + M^dag)/2
ComplexMatrix hermitize(const ComplexMatrix& m);

double spectral_norm(const ComplexMatrix& m);
double max_abs(const ComplexMatrix& m);

// Smallest eigenvalue of a Hermitian matrix.
double min_eigenvalue(const ComplexMatrix& herm);

struct EigResult {
  RealVector values;      // ascending
  ComplexMatrix vectors;  // orthonormal columns, values[i] <-> col i
};

// Rejects (throws std::invalid_argument) inputs that are not self-adjoint
// within tol.herm.
EigResult eig_hermitian(const ComplexMatrix& m,
                        const Tolerances& tol = default_tolerances());

// d x r matrix with orthonormal columns, r <= d.
class Isometry {
 public:
  explicit Isometry(ComplexMatrix v,
                    const Tolerances& tol = default_tolerances());
  int ambient_dim() const { return static_cast<int>(v_.rows()); }
  int reduced_dim() const { return static_cast<int>(v_.cols()); }
  const ComplexMatrix& matrix() const { return v_; }

 private:
  ComplexMatrix v_;
};

struct Subspace {
  int ambient_dim = 0;
  ComplexMatrix basis;  // ambient_dim x k, orthonormal columns; k may be 0

  int dim() const { return static_cast<int>(basis.cols()); }
  Isometry isometry(const Tolerances& tol = default_tolerances()) const {
    return Isometry(basis, tol);
  }
  // Frobenius distance between v and its projection onto the subspace.
  double distance(const ComplexVector& v) const {
    return (v - basis * (basis.adjoint() * v)).norm();
  }
};

// Orthonormal basis of {x : Mx = 0}, where "zero" means singular values
// <= tol * sigma_max. The empty subspace is a valid result.
Subspace kernel(const ComplexMatrix& m, double tol);

// Orthonormal basis of the orthogonal complement of span(vectors) in C^d.
Subspace orthonormal_complement(const std::vector<ComplexVector>& vectors,
                                int ambient_dim,
                                const Tolerances& tol = default_tolerances());

// Haar-distributed d x r isometry, deterministic per seed.
Isometry haar_isometry(int d, int r, std::uint64_t seed,
                       const Tolerances& tol = default_tolerances());

// Thin-QR orthonormalization with the column-phase fix that makes the map
// Ginibre -> Haar exact; requires full column rank.
ComplexMatrix orthonormalize(const ComplexMatrix& m);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

// Operators on a tensor product of factors with dimensions dims[0..k-1];
// the row index is the multi-index (i_0, ..., i_{k-1}) with i_0 slowest.
//
// partial_trace keeps the factors listed in `keep` (ascending) and traces
// out the rest; lift_to_factors embeds an operator acting on the `keep`
// factors as identity elsewhere.
ComplexMatrix partial_trace(const ComplexMatrix& m,
                            const std::vector<int>& dims,
                            const std::vector<int>& keep);
ComplexMatrix lift_to_factors(const ComplexMatrix& op,
                              const std::vector<int>& dims,
                              const std::vector<int>& keep);

}  // namespace qcompat
