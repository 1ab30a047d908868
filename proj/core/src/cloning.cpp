#include "qcompat/cloning.hpp"

#include <cmath>
#include <stdexcept>

namespace qcompat {

namespace {

void check_params(const CloneParams& p) {
  if (p.copies < 2 || p.dim < 2) {
    throw std::invalid_argument("cloning: need g >= 2 and d >= 2");
  }
  if (static_cast<int>(p.s.size()) != p.copies) {
    throw std::invalid_argument("cloning: s must have g entries");
  }
  for (double v : p.s) {
    if (v < 0.0 || v > 1.0) {
      throw std::invalid_argument("cloning: s entries must lie in [0,1]");
    }
  }
}

}  // namespace

double boundary_residual(const CloneParams& p) {
  check_params(p);
  const double g = p.copies, d = p.dim;
  double sum = 0.0, root_sum = 0.0;
  for (double v : p.s) {
    sum += v;
    root_sum += std::sqrt(v * (d * d - 1.0) + 1.0);
  }
  const double lhs = (g + d - 1.0) * (g - d * d + d + (d * d - 1.0) * sum);
  return lhs - root_sum * root_sum;
}

CloneMembership in_gamma_clone(const CloneParams& p,
                               const SdpOptions& options) {
  check_params(p);
  double smax = 0.0, smin = 1.0;
  for (double v : p.s) {
    smax = std::max(smax, v);
    smin = std::min(smin, v);
  }
  CloneMembership out;
  if (smax == 0.0) {  // full depolarization on every arm is a channel
    out.member = true;
    out.alpha_star = std::numeric_limits<double>::infinity();
    out.method = CloneMethod::Trivial;
    return out;
  }
  if (smin == 0.0) {
    // The boundary formula parameterizes (0,1]^g only; decide such rays with
    // the Choi oracle directly.
    auto choi = clone_choi_feasible(p, options);
    out.member = choi.verdict == FeasVerdict::Feasible;
    out.alpha_star = std::numeric_limits<double>::quiet_NaN();
    out.method = CloneMethod::ChoiOracle;
    return out;
  }

  const double alpha_hi = 1.0 / smax;
  auto residual_at = [&](double alpha) {
    CloneParams q = p;
    for (double& v : q.s) v *= alpha;
    return boundary_residual(q);
  };
  out.method = CloneMethod::BoundaryBisection;
  if (residual_at(alpha_hi) <= 0.0) {
    // the admissible segment of the ray never crosses the boundary
    out.alpha_star = alpha_hi;
    out.member = true;
    return out;
  }
  double lo = 0.0, hi = alpha_hi;
  for (int iter = 0; iter < 200 && (hi - lo) > 1e-13 * alpha_hi; ++iter) {
    const double mid = 0.5 * (lo + hi);
    (residual_at(mid) <= 0.0 ? lo : hi) = mid;
  }
  out.alpha_star = 0.5 * (lo + hi);
  out.member = out.alpha_star >= 1.0 - 1e-9;
  return out;
}

ChoiFeasibility clone_choi_feasible(const CloneParams& p,
                                    const SdpOptions& options) {
  check_params(p);
  const int g = p.copies, d = p.dim;
  long total = d;
  for (int i = 0; i < g; ++i) total *= d;
  if (total > options.variable_dim_cap) {
    throw std::invalid_argument(
        "clone_choi_feasible: d^{g+1} exceeds the solver cap");
  }
  const int D = static_cast<int>(total);
  std::vector<int> dims(g + 1, d);

  SdpInstance inst;
  const int j = inst.add_block("choi", D);

  // one scalar row per element of a Hermitian basis of the kept factors
  auto add_trace_constraint = [&](const std::vector<int>& keep,
                                  const ComplexMatrix& rhs) {
    const int kd = static_cast<int>(rhs.rows());
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    auto emit = [&](const ComplexMatrix& h) {
      SdpConstraint c;
      c.block_terms.push_back({j, lift_to_factors(h, dims, keep)});
      c.rhs = (rhs.cwiseProduct(h.conjugate())).sum().real();
      inst.add_constraint(std::move(c));
    };
    ComplexMatrix h = ComplexMatrix::Zero(kd, kd);
    for (int q = 0; q < kd; ++q) {
      h.setZero();
      h(q, q) = 1.0;
      emit(h);
    }
    for (int cc = 0; cc < kd; ++cc) {
      for (int rr = 0; rr < cc; ++rr) {
        h.setZero();
        h(rr, cc) = inv_sqrt2;
        h(cc, rr) = inv_sqrt2;
        emit(h);
        h.setZero();
        h(rr, cc) = Complex(0.0, inv_sqrt2);
        h(cc, rr) = Complex(0.0, -inv_sqrt2);
        emit(h);
      }
    }
  };

  // trace preservation: Tr_out J = I_d
  add_trace_constraint({0}, ComplexMatrix::Identity(d, d));

  // marginal arm j: (id x Tr_others) J = Choi of the depolarizing map
  ComplexMatrix omega = ComplexMatrix::Zero(d * d, d * d);  // sum E_ab x E_ab
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b) {
      omega(a * d + a, b * d + b) = 1.0;
    }
  }
  for (int arm = 1; arm <= g; ++arm) {
    const ComplexMatrix rhs =
        p.s[arm - 1] * omega +
        (1.0 - p.s[arm - 1]) / d * ComplexMatrix::Identity(d * d, d * d);
    add_trace_constraint({0, arm}, rhs);
  }

  auto feas = feasibility(inst, options);
  ChoiFeasibility out;
  out.verdict = feas.verdict;
  out.margin = feas.margin;
  if (feas.verdict == FeasVerdict::Feasible) {
    out.choi = feas.blocks[0];
  }
  return out;
}

ComplexMatrix choi_adjoint_apply(const ComplexMatrix& j, int copies, int dim,
                                 const ComplexMatrix& y_outputs) {
  long total = dim;
  long out_dim = 1;
  for (int i = 0; i < copies; ++i) {
    total *= dim;
    out_dim *= dim;
  }
  if (j.rows() != total || y_outputs.rows() != out_dim) {
    throw std::invalid_argument("choi_adjoint_apply: size mismatch");
  }
  std::vector<int> dims(copies + 1, dim);
  std::vector<int> outputs(copies);
  for (int i = 0; i < copies; ++i) outputs[i] = i + 1;
  const ComplexMatrix lifted = lift_to_factors(y_outputs, dims, outputs);
  // Tr[rho Psi(Y)] = Tr[J (rho^T x Y)]  =>  Psi(Y) = Tr_out[J (I x Y)]^T
  return partial_trace(j * lifted, dims, {0}).transpose();
}

}  // namespace qcompat
