#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "qcompat/compat.hpp"
#include "qcompat/constructions.hpp"
#include "qcompat/povm.hpp"

namespace qcompat {

struct SearchBudget {
  int restarts = 10;
  int steps = 60;
  double step_scale = 0.3;
  std::uint64_t seed = 0;
};

struct SearchOutcome {
  bool found = false;
  std::optional<Isometry> isometry;
  double best_objective = 0.0;  // best robustness t*(V) seen
  int evaluations = 0;
  std::string provenance;
};

// Randomized certificate search over isometries V: C^r -> C^d: random
// restarts plus local perturbations V <- orthonormalize(V + eps G) with
// shrinking eps, scoring by the robustness t*(V) of the reduced tuple.
// Success requires the reduction to re-verify as compatible (certify) or
// incompatible (falsify) under an independent joint-measurability call.
// A failed search is never a proof of absence.
SearchOutcome search_certify(const PovmTuple& tuple, int r,
                             const SearchBudget& budget = {},
                             const CompatOptions& options = {});
SearchOutcome search_falsify(const PovmTuple& tuple, int r,
                             const SearchBudget& budget = {},
                             const CompatOptions& options = {});

// Structural constructions first (third-MUB truncation when metadata is
// present, commutative and scalar reductions, the generalized-permutation
// kernel bound for two von Neumann bases), randomized search last.
SearchOutcome certify_R_at_least(const PovmTuple& tuple, int r,
                                 const SearchBudget& budget = {},
                                 const CompatOptions& options = {});
SearchOutcome falsify_Rbar_at_least(const PovmTuple& tuple, int r,
                                    const SearchBudget& budget = {},
                                    const CompatOptions& options = {});

struct BoundEntry {
  int value = 0;
  std::string provenance;
  std::optional<Isometry> certificate;
  bool verified = false;
};

struct DimensionBounds {
  BoundEntry r_lower;      // R >= value, witnessed by an isometry
  BoundEntry r_bar_lower;  // every rank-value reduction is compatible
  BoundEntry r_bar_upper;  // from a falsifying isometry at rank value+1
  std::string hash;        // tuple_hash of the tuple these bounds certify
};

DimensionBounds bounds_summary(const PovmTuple& tuple,
                               const SearchBudget& budget = {},
                               const CompatOptions& options = {});

// Largest r such that the tuple provably is a noisy version N_t[B] of some
// valid tuple B with t_x <= 1/(2r(k_x-1)); reads the noise content off the
// effect spectra, no metadata needed.
int rbar_lower_from_noise_content(const PovmTuple& tuple);

// Bound bookkeeping for noisy level-k spin tuples at symmetric noise t,
// using the closed-form thresholds; nothing is materialized, so this works
// at sizes far beyond the SDP cap.
DimensionBounds spin_noise_bounds(int level, double t);

}  // namespace qcompat
