#pragma once

#include <vector>

#include "qcompat/matrix.hpp"
#include "qcompat/sdp.hpp"

namespace qcompat {

// Parameter region of 1 -> g asymmetric approximate cloners on C^d: the set
// of vectors s in [0,1]^g for which a channel exists whose j-th marginal is
// the depolarizing map rho -> s_j rho + (1 - s_j) I/d.
struct CloneParams {
  int copies = 2;  // g
  int dim = 2;     // d
  std::vector<double> s;
};

// LHS - RHS of the optimal-cloning boundary equation
//   (g+d-1) [g - d^2 + d + (d^2-1) sum_i s_i] - (sum_i sqrt(s_i(d^2-1)+1))^2.
// Zero on the boundary; positive strictly outside the closure along the ray
// through s (verified against the Choi oracle).
double boundary_residual(const CloneParams& p);

enum class CloneMethod { BoundaryBisection, ChoiOracle, Trivial };

struct CloneMembership {
  bool member = false;
  // max{alpha : alpha * s admissible and inside}, capped at 1/max_i(s_i);
  // member iff alpha_star >= 1.
  double alpha_star = 0.0;
  CloneMethod method = CloneMethod::BoundaryBisection;
};

// Membership via ray scaling on the boundary formula. Rays with some (but
// not all) s_i = 0 are outside the boundary parameterization and fall back
// to the Choi oracle.
CloneMembership in_gamma_clone(const CloneParams& p,
                               const SdpOptions& options = {});

struct ChoiFeasibility {
  FeasVerdict verdict = FeasVerdict::Undecided;
  double margin = 0.0;
  ComplexMatrix choi;  // d^{g+1} x d^{g+1}, present when feasible
};

// Independent oracle: existence of a CPTP map with the exact depolarizing
// marginals, decided through the PSD Choi matrix with partial-trace equality
// constraints.
ChoiFeasibility clone_choi_feasible(const CloneParams& p,
                                    const SdpOptions& options = {});

// Adjoint (Heisenberg-picture) action of the channel with Choi matrix j:
// Psi(Y) for Y on the g output factors. Used to exercise the dual
// (unital-map) description of the cloning region.
ComplexMatrix choi_adjoint_apply(const ComplexMatrix& j, int copies, int dim,
                                 const ComplexMatrix& y_outputs);

}  // namespace qcompat
