#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qcompat/cloning.hpp"
#include "qcompat/povm.hpp"
#include "qcompat/sdp.hpp"
#include "qcompat/tolerances.hpp"

namespace qcompat {

enum class CompatVerdict { Compatible, Incompatible, Undecided };

std::string to_string(CompatVerdict v);

// Verdict object for joint-measurability questions. A Compatible verdict
// always carries the joint measurement that witnesses it; Incompatible is
// only reported with a robustness value clearly below one. The feasibility
// margin is max over joint POVMs of the smallest block eigenvalue, so its
// sign decides compatibility and its magnitude is the distance to the
// boundary.
struct CompatReport {
  CompatVerdict verdict = CompatVerdict::Undecided;
  std::optional<JointPovm> joint;
  double robustness = 1.0;          // t*, capped at 1
  double margin = 0.0;              // feasibility margin
  double marginal_residual = 0.0;   // worst |marginal - effect| of the joint
  std::string diagnostics;
};

struct CompatOptions {
  Tolerances tol;
  SdpOptions sdp;

  CompatOptions() { sdp.tol = tol.sdp; }
};

CompatReport joint_measurability(const PovmTuple& tuple,
                                 const CompatOptions& options = {});

// t* = max{t in [0,1] : N_{t . direction}[tuple] is jointly measurable}.
// The default direction is all-ones (uniform noise on every POVM).
struct RobustnessResult {
  double t_star = 0.0;
  SdpStatus status = SdpStatus::NumericalFailure;
};

RobustnessResult noise_robustness(const PovmTuple& tuple,
                                  const std::vector<double>& direction = {},
                                  const CompatOptions& options = {});

// Value of the two-effect joint measurability program
//   min lambda : 0 <= X <= E, F;  E + F - X <= lambda I.
// The effects are compatible iff the value is <= 1.
double pair_effect_value(const ComplexMatrix& e, const ComplexMatrix& f,
                         const CompatOptions& options = {});

// Sufficient compatibility criterion from asymmetric cloning:
// s_x = 1 - min_i d lambda_min(A_i) / Tr A_i; compatible if s is a valid
// cloning parameter vector. Inconclusive otherwise.
struct CloningCriterionResult {
  std::vector<double> s;
  CompatVerdict verdict = CompatVerdict::Undecided;
  CloneMembership membership;
};

CloningCriterionResult cloning_criterion(const PovmTuple& tuple,
                                         const CompatOptions& options = {});

struct Ensemble {
  int dim = 0;
  std::vector<ComplexMatrix> states;  // unit-trace PSD
  std::vector<double> probs;
};

struct SuperEnsemble {
  std::vector<Ensemble> ensembles;
  std::vector<double> probs;

  int dim() const { return ensembles.empty() ? 0 : ensembles[0].dim; }
  std::vector<int> outcome_counts() const {
    std::vector<int> k;
    for (const auto& e : ensembles) {
      k.push_back(static_cast<int>(e.states.size()));
    }
    return k;
  }
};

void validate_ensemble(const Ensemble& e,
                       const Tolerances& tol = default_tolerances());
void validate_super_ensemble(const SuperEnsemble& s,
                             const Tolerances& tol = default_tolerances());

// Best success probability of identifying the state when the ensemble label
// is announced before the measurement: one discrimination SDP per ensemble.
double prior_guess(const SuperEnsemble& se, const CompatOptions& options = {});

// Same protocol with the label announced after the measurement: a single SDP
// over a joint POVM on the product outcome set.
double post_guess(const SuperEnsemble& se, const CompatOptions& options = {});

// Bilinear pairing sum_x q_x sum_i p_i Tr[sigma_i A_i]; the superensemble
// witnesses incompatibility of the tuple iff this exceeds post_guess.
double witness_value(const SuperEnsemble& se, const PovmTuple& tuple);

// Samples superensembles supported on the subspace h (pure states, uniform
// weights; the first candidate is aligned with the tuple's effects) and
// returns the largest witness_value - post_guess seen. Positive values
// certify that the tuple restricted to h is incompatible.
double restricted_witness_check(const PovmTuple& tuple, const Subspace& h,
                                int samples, std::uint64_t seed,
                                const CompatOptions& options = {});

// Per-POVM uniform-noise weights t_x = 1/(2r(k_x - 1)) under which any tuple
// with these outcome counts becomes compatible on every r-dimensional
// reduction.
std::vector<double> dimension_noise_threshold(
    const std::vector<int>& outcome_counts, int r);

}  // namespace qcompat
