#pragma once

#include <string>
#include <vector>

#include "qcompat/matrix.hpp"

namespace qcompat {

// Dense semidefinite programming over complex Hermitian PSD blocks plus free
// real scalars, with affine equality constraints:
//
//   min/max  sum_j <C_j, X_j> + sum_k c_k u_k + const
//   s.t.     sum_j <F_ij, X_j> + sum_k g_ik u_k = b_i   (i = 1..p)
//            X_j >= 0
//
// <A, B> = Re Tr[A B] for Hermitian A, B. Inequalities are modelled with
// explicit slack blocks and matrix equalities; see add_matrix_equality.
//
// The solver is a primal-dual interior-point method on the homogeneous
// self-dual embedding with Nesterov-Todd scaling, run entirely in dense
// arithmetic. Hermitian blocks are first-class: all cone computations
// (Cholesky, eigenvalues, scalings) are done on the complex matrices and only
// the reduced KKT system is real. Solves are deterministic: no randomized
// pivoting, no parallel reductions.

struct SdpBlockTerm {
  int block = -1;
  ComplexMatrix coeff;  // Hermitian
};

struct SdpScalarTerm {
  int scalar = -1;
  double coeff = 0.0;
};

struct SdpConstraint {
  std::vector<SdpBlockTerm> block_terms;
  std::vector<SdpScalarTerm> scalar_terms;
  double rhs = 0.0;
};

enum class SdpSense { Min, Max };

struct SdpObjective {
  std::vector<SdpBlockTerm> block_terms;
  std::vector<SdpScalarTerm> scalar_terms;
  double constant = 0.0;
};

class SdpInstance {
 public:
  int add_block(std::string name, int dim);
  int add_scalar(std::string name);
  void add_constraint(SdpConstraint c);

  // sum_j coeff_j X_{block_j} + sum_k u_k M_k = rhs, all dim x dim Hermitian.
  // Expands into dim^2 real scalar constraints.
  void add_matrix_equality(
      const std::vector<std::pair<int, double>>& blocks,
      const std::vector<std::pair<int, ComplexMatrix>>& scalars,
      const ComplexMatrix& rhs);

  void set_objective(SdpSense sense, SdpObjective objective);

  int block_count() const { return static_cast<int>(block_dims_.size()); }
  int scalar_count() const { return static_cast<int>(scalar_names_.size()); }
  int block_dim(int j) const { return block_dims_[j]; }
  const std::string& block_name(int j) const { return block_names_[j]; }
  const std::string& scalar_name(int k) const { return scalar_names_[k]; }
  const std::vector<SdpConstraint>& constraints() const { return constraints_; }
  const SdpObjective& objective() const { return objective_; }
  SdpSense sense() const { return sense_; }

  // Sum of block dimensions plus scalar count; bounded by the solver cap.
  int total_variable_dim() const;

 private:
  std::vector<int> block_dims_;
  std::vector<std::string> block_names_;
  std::vector<std::string> scalar_names_;
  std::vector<SdpConstraint> constraints_;
  SdpObjective objective_;
  SdpSense sense_ = SdpSense::Min;
};

enum class SdpStatus { Optimal, Infeasible, Unbounded, NumericalFailure };

std::string to_string(SdpStatus s);

struct SdpSolution {
  SdpStatus status = SdpStatus::NumericalFailure;
  double value = 0.0;       // objective in the user's sense
  double dual_value = 0.0;  // dual objective in the user's sense
  std::vector<ComplexMatrix> blocks;
  std::vector<double> scalars;
  std::vector<double> eq_duals;             // one per scalar constraint
  std::vector<ComplexMatrix> block_duals;   // PSD dual slack per block
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;  // relative primal-dual gap
  int iterations = 0;
  std::string message;
};

struct SdpOptions {
  double tol = 1e-8;
  int max_iterations = 200;
  int variable_dim_cap = 400;
  // An infeasibility/unboundedness certificate is accepted only when the ray
  // improves by more than certificate_ratio * tol; weaker rays report
  // NumericalFailure rather than risking a wrong verdict.
  double certificate_ratio = 10.0;
  bool debug = false;  // per-iteration trace on stderr
};

SdpSolution solve(const SdpInstance& instance, const SdpOptions& options = {});

enum class FeasVerdict { Feasible, Infeasible, Undecided };

// Phase-I margin program: maximize alpha subject to the instance's equality
// constraints with every block shifted to X_j - alpha I >= 0 (alpha capped at
// 1). The margin alpha* is the distance-to-feasibility scalar: the instance
// is feasible iff alpha* >= 0, and the sign is decided only outside the
// verdict band.
struct FeasibilityResult {
  FeasVerdict verdict = FeasVerdict::Undecided;
  double margin = 0.0;
  std::vector<ComplexMatrix> blocks;  // X_j = shifted block + alpha I
  std::vector<double> scalars;
  // On infeasibility the equality multipliers form an improving ray:
  // sum_i y_i F_ij >= 0 for all j while sum_i y_i b_i < 0.
  std::vector<double> ray_eq_duals;
  std::vector<ComplexMatrix> ray_block_duals;
  SdpSolution raw;
};

FeasibilityResult feasibility(const SdpInstance& instance,
                              const SdpOptions& options = {});

}  // namespace qcompat
