#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "qcompat/matrix.hpp"
#include "qcompat/povm.hpp"
#include "qcompat/sdp.hpp"
#include "qcompat/tolerances.hpp"

namespace qcompat {

// P(i, j) = z_j delta_{i, sigma(j)}
struct GeneralizedPermutation {
  int dim = 0;
  ComplexVector z;
  std::vector<int> sigma;  // 0-based permutation

  ComplexMatrix matrix() const;
};

struct MubFamily {
  int dim = 0;
  std::vector<ComplexMatrix> bases;  // columns are basis vectors

  // largest | |<b_i|c_j>|^2 - 1/d | over distinct bases
  double unbiasedness_defect() const;
};

// 2k+1 self-adjoint, unitary, pairwise anticommuting matrices of size 2^k,
// built recursively from the Pauli matrices.
struct SpinSystem {
  int level = 0;
  std::vector<ComplexMatrix> matrices;
};

ComplexMatrix fourier_matrix(int d);

// comp basis, the Fourier basis, then quadratic-phase bases; prime d only
// (Pauli eigenbases for d = 2). Unbiasedness is verified on construction.
MubFamily mub_family(int d, int count,
                     const Tolerances& tol = default_tolerances());

enum class ZetaStrategy {
  EigenvalueClusters,       // sigma = id, z constant = each eigenvalue of U
  DiagonalPhases,           // sigma = id, z_j = phase(U_jj)
  ExhaustivePermutations,   // all sigma (d <= 6), z_j = phase(U_{sigma(j),j})
  All,
};

// Lower bound on the compatibility dimension of the computational basis vs
// the basis of columns of U, via the largest kernel of (P_{z,sigma} - U)^dag
// over a finite candidate set. Returns a bound, never a claim of optimality.
struct ZetaCertificate {
  int bound = 0;
  GeneralizedPermutation gperm;
  Subspace subspace;  // left-kernel; reducing to it gives collinear effects
};

ZetaCertificate zeta_lower_bound(const ComplexMatrix& u,
                                 ZetaStrategy strategy = ZetaStrategy::All,
                                 const Tolerances& tol = default_tolerances());

// max_j || V^dag u_j - z_j V^dag e_{sigma(j)} || for the certificate's
// isometry; small values confirm the collinearity that makes the reduced
// two-basis tuple compatible.
double zeta_certificate_defect(const ComplexMatrix& u,
                               const ZetaCertificate& cert);

SpinSystem spin_system(int level);

// Dichotomic POVMs ((I + F_x)/2, (I - F_x)/2) on C^{2^level}. The source
// material writes these on a space of twice the size; the recursion produces
// 2^level x 2^level matrices and that is the convention used throughout.
PovmTuple spin_povms(int level);

// V = sum_{k<r} |c_k><k| for the columns c_k of a (third) basis.
Isometry mub_truncation_isometry(const ComplexMatrix& basis, int r,
                                 const Tolerances& tol = default_tolerances());

// Noise window ((2+sqrt d)/(2(1+sqrt d)), (2+r)/(2(1+r))] in which a MUB pair
// is incompatible yet its rank-r third-MUB truncation is compatible;
// nonempty iff 2 <= r < sqrt(d).
struct LambdaInterval {
  double lo = 0.0;  // exclusive
  double hi = 0.0;  // inclusive
  bool empty() const { return !(lo < hi); }
  bool contains(double x) const { return x > lo && x <= hi; }
};

LambdaInterval lambda_interval(int r, int d);

struct ReductionOptions {
  int restarts = 64;
  std::uint64_t seed = 0;
};

// r orthonormal vectors x_i with <x_i| A |x_j> = 0 for i != j and every
// input effect A, returned as the isometry [x_1 ... x_r]; all reduced
// effects are then simultaneously diagonal, hence commute. Requires
// d >= (n+1)(r-1)+1 where n+1 = dim span_R{effects, I}; at d = (n+1)(r-1)
// exactly, a randomized eigenvector-seeded search is attempted first.
Isometry commutative_reduction(const std::vector<ComplexMatrix>& effects,
                               int r, const ReductionOptions& opts = {},
                               const Tolerances& tol = default_tolerances());

// Reduction making every input effect a multiple of the identity, via a
// Tverberg partition of the diagonal values of a commutative frame.
struct ScalarReduction {
  Isometry isometry;
  std::vector<double> scalars;  // V^dag A_s V = scalars[s] * I_r
};

ScalarReduction scalar_reduction(const std::vector<ComplexMatrix>& effects,
                                 int r, const ReductionOptions& opts = {},
                                 const Tolerances& tol = default_tolerances());

// Partition of the points into r parts whose convex hulls share a point,
// found by exhaustive enumeration with an LP certificate per candidate.
struct TverbergResult {
  std::vector<std::vector<int>> parts;
  RealVector point;
  std::vector<double> weights;  // per input point, convex within its part
};

TverbergResult tverberg_partition(const std::vector<RealVector>& points,
                                  int r, long budget = 3000000,
                                  const SdpOptions& options = {});

enum class DeltaVerdict { Member, Unknown };

// Membership certificate for the restricted compatibility region of a MUB
// g-tuple: s is a member at reduction rank r whenever s lies in the cloning
// region at dimension r, realized by truncating the (g+1)-th basis. Falls
// back to the caller-provided search (if any) and reports Unknown otherwise.
DeltaVerdict delta_region_member(
    const MubFamily& family, int g, int r, const std::vector<double>& s,
    const std::function<bool(const PovmTuple&, int)>& search_fallback = {},
    const SdpOptions& options = {});

}  // namespace qcompat
