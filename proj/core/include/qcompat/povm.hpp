#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qcompat/matrix.hpp"
#include "qcompat/tolerances.hpp"

namespace qcompat {

struct Povm {
  int dim = 0;
  std::vector<ComplexMatrix> effects;

  int outcomes() const { return static_cast<int>(effects.size()); }
};

// Optional structural annotations carried alongside a tuple. These never
// change the measurement data; they let dimension-bound routines reach for
// exact constructions (MUB truncation, spin thresholds) that require knowing
// how the tuple was produced. Consumers re-derive the tuple from the
// annotation and compare before trusting it.
struct MubMetadata {
  std::vector<ComplexMatrix> bases;  // >= g unitaries; first g generate POVMs
  std::vector<double> noise;         // per-POVM uniform-noise weights
};

struct SpinMetadata {
  int level = 0;
  std::vector<double> noise;
};

struct TupleMetadata {
  std::optional<MubMetadata> mub;
  std::optional<SpinMetadata> spin;
};

struct PovmTuple {
  int dim = 0;
  std::vector<Povm> povms;
  std::optional<TupleMetadata> metadata;

  int count() const { return static_cast<int>(povms.size()); }
  std::vector<int> outcome_counts() const {
    std::vector<int> k;
    k.reserve(povms.size());
    for (const auto& p : povms) k.push_back(p.outcomes());
    return k;
  }
};

// Joint POVM over the product outcome set [k_1] x ... x [k_g]. Effects are
// flattened row-major: the first axis varies slowest.
struct JointPovm {
  int dim = 0;
  std::vector<int> shape;
  std::vector<ComplexMatrix> effects;

  int flat_index(const std::vector<int>& multi) const;
  std::vector<int> multi_index(int flat) const;
};

struct ValidationReport {
  bool ok = false;
  double psd_violation = 0.0;   // worst max(0, -lambda_min) over effects
  double sum_residual = 0.0;    // max-abs of sum(effects) - I
  int worst_effect = -1;
  std::string message;
};

ValidationReport validate(const Povm& p,
                          const Tolerances& tol = default_tolerances());
ValidationReport validate(const JointPovm& j,
                          const Tolerances& tol = default_tolerances());

Povm apply_noise(const Povm& p, double t);
// Componentwise N_{t_x}; rejects t outside [0,1] or length mismatch.
PovmTuple apply_noise(const PovmTuple& tuple, const std::vector<double>& t);

Povm reduce(const Povm& p, const Isometry& v);
PovmTuple reduce(const PovmTuple& tuple, const Isometry& v);

Povm marginal(const JointPovm& joint, int axis);

// Max over effect pairs of the spectral norm of the commutator [X, Y].
// cross_only restricts to pairs taken from two different POVMs.
double pairwise_commutator_norm(const PovmTuple& tuple, bool cross_only = true);

// Von Neumann measurement from the columns of a unitary.
Povm von_neumann_povm(const ComplexMatrix& basis,
                      const Tolerances& tol = default_tolerances());

// Explicit joint measurement for a tuple whose cross pairs all commute:
// C_i = A^(1)_{i_1} ... A^(g)_{i_g}.
JointPovm joint_from_commuting(const PovmTuple& tuple,
                               const Tolerances& tol = default_tolerances());

// Stable 64-bit digest of the measurement data (12 significant digits per
// entry; metadata excluded). Certificates are bound to the tuple they
// certify through this value.
std::string tuple_hash(const PovmTuple& tuple);

}  // namespace qcompat
