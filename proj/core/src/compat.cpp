#include "qcompat/compat.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

#include "qcompat/rng.hpp"

namespace qcompat {

std::string to_string(CompatVerdict v) {
  switch (v) {
    case CompatVerdict::Compatible: return "compatible";
    case CompatVerdict::Incompatible: return "incompatible";
    case CompatVerdict::Undecided: return "undecided";
  }
  return "unknown";
}

namespace {

struct JointLayout {
  std::vector<int> shape;
  int total = 1;

  explicit JointLayout(const PovmTuple& t) : shape(t.outcome_counts()) {
    for (int k : shape) total *= k;
  }

  std::vector<int> multi(int flat) const {
    std::vector<int> idx(shape.size());
    for (int x = static_cast<int>(shape.size()) - 1; x >= 0; --x) {
      idx[x] = flat % shape[x];
      flat /= shape[x];
    }
    return idx;
  }
};

void check_tuple(const PovmTuple& tuple, const Tolerances& tol) {
  if (tuple.povms.empty()) {
    throw std::invalid_argument("compat: empty tuple");
  }
  for (const auto& p : tuple.povms) {
    if (p.dim != tuple.dim) {
      throw std::invalid_argument("compat: POVM dimension mismatch");
    }
    const auto rep = validate(p, tol);
    if (!rep.ok) {
      throw std::invalid_argument("compat: invalid POVM (" + rep.message +
                                  ")");
    }
  }
}

// Effects carrying admissible (within tol.psd) negative eigenvalues are
// accepted by validation but clipped here, at SDP assembly, so the marginal
// equations stay feasible; the caller's data is never mutated.
ComplexMatrix clip_tiny_negatives(const ComplexMatrix& e, double psd_tol) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitize(e));
  if (es.eigenvalues()(0) >= 0.0 || es.eigenvalues()(0) < -psd_tol) {
    return hermitize(e);
  }
  return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).asDiagonal() *
         es.eigenvectors().adjoint();
}

// blocks C_i over the product outcome set plus the marginal equalities
// sum_{i : i_x = o} C_i = target[x][o]
SdpInstance joint_instance(const PovmTuple& tuple, const JointLayout& layout,
                           const std::vector<std::vector<ComplexMatrix>>&
                               targets) {
  SdpInstance inst;
  std::vector<int> blocks(layout.total);
  for (int flat = 0; flat < layout.total; ++flat) {
    blocks[flat] = inst.add_block("C" + std::to_string(flat), tuple.dim);
  }
  const int g = tuple.count();
  for (int x = 0; x < g; ++x) {
    for (int o = 0; o < layout.shape[x]; ++o) {
      std::vector<std::pair<int, double>> terms;
      for (int flat = 0; flat < layout.total; ++flat) {
        if (layout.multi(flat)[x] == o) terms.push_back({blocks[flat], 1.0});
      }
      inst.add_matrix_equality(terms, {}, targets[x][o]);
    }
  }
  return inst;
}

JointPovm clip_to_joint(const PovmTuple& tuple, const JointLayout& layout,
                        const std::vector<ComplexMatrix>& blocks) {
  JointPovm joint;
  joint.dim = tuple.dim;
  joint.shape = layout.shape;
  joint.effects.reserve(layout.total);
  for (int flat = 0; flat < layout.total; ++flat) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitize(blocks[flat]));
    const RealVector clipped = es.eigenvalues().cwiseMax(0.0);
    joint.effects.push_back(es.eigenvectors() * clipped.asDiagonal() *
                            es.eigenvectors().adjoint());
  }
  // Clipping and the margin shift leave a residual in sum(C) = I that grows
  // with the number of outcomes; squeeze it out symmetrically.
  ComplexMatrix sum = ComplexMatrix::Zero(tuple.dim, tuple.dim);
  for (const auto& e : joint.effects) sum += e;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitize(sum));
  if (es.eigenvalues()(0) > 0.5) {
    const ComplexMatrix inv_sqrt =
        es.eigenvectors() *
        es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
        es.eigenvectors().adjoint();
    for (auto& e : joint.effects) e = hermitize(inv_sqrt * e * inv_sqrt);
  }
  return joint;
}

double worst_marginal_residual(const JointPovm& joint,
                               const PovmTuple& tuple) {
  double worst = 0.0;
  for (int x = 0; x < tuple.count(); ++x) {
    const Povm m = marginal(joint, x);
    for (int i = 0; i < m.outcomes(); ++i) {
      worst = std::max(worst,
                       max_abs(m.effects[i] - tuple.povms[x].effects[i]));
    }
  }
  return worst;
}

long joint_problem_size(const PovmTuple& tuple) {
  long size = tuple.dim;
  for (const auto& p : tuple.povms) size *= p.outcomes();
  return size;
}

}  // namespace

CompatReport joint_measurability(const PovmTuple& tuple,
                                 const CompatOptions& options) {
  check_tuple(tuple, options.tol);
  CompatReport report;
  if (joint_problem_size(tuple) > options.sdp.variable_dim_cap) {
    report.diagnostics = "joint problem size exceeds the solver cap";
    return report;
  }
  const JointLayout layout(tuple);
  std::vector<std::vector<ComplexMatrix>> targets;
  for (const auto& p : tuple.povms) {
    std::vector<ComplexMatrix> clipped;
    for (const auto& e : p.effects) {
      clipped.push_back(clip_tiny_negatives(e, options.tol.psd));
    }
    targets.push_back(std::move(clipped));
  }

  const auto feas = feasibility(joint_instance(tuple, layout, targets),
                                options.sdp);
  report.margin = feas.margin;
  const double band = options.sdp.certificate_ratio * options.sdp.tol;

  if (feas.verdict == FeasVerdict::Feasible) {
    JointPovm joint = clip_to_joint(tuple, layout, feas.blocks);
    report.marginal_residual = worst_marginal_residual(joint, tuple);
    const auto rep = validate(joint, options.tol);
    // a compatible verdict is only issued with a certificate that passes
    // validation and reproduces every marginal within the band
    if (rep.ok && report.marginal_residual <= band) {
      report.verdict = CompatVerdict::Compatible;
      report.joint = std::move(joint);
      report.robustness = 1.0;
    } else {
      report.diagnostics = "joint certificate failed re-validation "
                           "(marginal residual " +
                           std::to_string(report.marginal_residual) + "; " +
                           rep.message + ")";
    }
    return report;
  }
  if (feas.verdict == FeasVerdict::Undecided) {
    report.diagnostics = "feasibility solve failed: " + feas.raw.message;
    return report;
  }

  // Quantify before declaring incompatibility.
  const auto rob = noise_robustness(tuple, {}, options);
  report.robustness = rob.t_star;
  if (rob.status == SdpStatus::Optimal && rob.t_star < 1.0 - band) {
    report.verdict = CompatVerdict::Incompatible;
  } else if (rob.status != SdpStatus::Optimal) {
    report.diagnostics = "robustness solve failed";
  } else {
    report.diagnostics = "margin and robustness disagree near the boundary";
  }
  return report;
}

RobustnessResult noise_robustness(const PovmTuple& tuple,
                                  const std::vector<double>& direction,
                                  const CompatOptions& options) {
  check_tuple(tuple, options.tol);
  const int g = tuple.count();
  std::vector<double> dir = direction;
  if (dir.empty()) dir.assign(g, 1.0);
  if (static_cast<int>(dir.size()) != g) {
    throw std::invalid_argument("noise_robustness: direction length");
  }
  double dmax = 0.0;
  for (double v : dir) {
    if (v < 0.0 || v > 1.0) {
      throw std::invalid_argument(
          "noise_robustness: direction entries must lie in [0,1]");
    }
    dmax = std::max(dmax, v);
  }
  if (dmax == 0.0) {
    throw std::invalid_argument("noise_robustness: zero direction");
  }
  if (joint_problem_size(tuple) > options.sdp.variable_dim_cap) {
    return {0.0, SdpStatus::NumericalFailure};
  }

  const JointLayout layout(tuple);
  SdpInstance inst;
  std::vector<int> blocks(layout.total);
  for (int flat = 0; flat < layout.total; ++flat) {
    blocks[flat] = inst.add_block("C" + std::to_string(flat), tuple.dim);
  }
  const int t = inst.add_scalar("t");
  const ComplexMatrix eye = ComplexMatrix::Identity(tuple.dim, tuple.dim);
  for (int x = 0; x < g; ++x) {
    const int k = layout.shape[x];
    const ComplexMatrix uniform = eye / static_cast<double>(k);
    for (int o = 0; o < k; ++o) {
      std::vector<std::pair<int, double>> terms;
      for (int flat = 0; flat < layout.total; ++flat) {
        if (layout.multi(flat)[x] == o) terms.push_back({blocks[flat], 1.0});
      }
      // sum C - t dir_x (A - I/k) = I/k
      const ComplexMatrix tcoeff =
          -dir[x] *
          (clip_tiny_negatives(tuple.povms[x].effects[o], options.tol.psd) -
           uniform);
      inst.add_matrix_equality(terms, {{t, tcoeff}}, uniform);
    }
  }
  const int lo = inst.add_block("t_lo", 1);
  const int hi = inst.add_block("t_hi", 1);
  SdpConstraint c0;
  c0.block_terms.push_back({lo, ComplexMatrix::Ones(1, 1)});
  c0.scalar_terms.push_back({t, -1.0});
  inst.add_constraint(std::move(c0));
  SdpConstraint c1;
  c1.block_terms.push_back({hi, ComplexMatrix::Ones(1, 1)});
  c1.scalar_terms.push_back({t, 1.0});
  c1.rhs = 1.0;
  inst.add_constraint(std::move(c1));
  SdpObjective obj;
  obj.scalar_terms.push_back({t, 1.0});
  inst.set_objective(SdpSense::Max, obj);

  const auto sol = solve(inst, options.sdp);
  RobustnessResult out;
  out.status = sol.status;
  if (sol.status == SdpStatus::Optimal) {
    out.t_star = std::clamp(sol.value, 0.0, 1.0);
  }
  return out;
}

double pair_effect_value(const ComplexMatrix& e, const ComplexMatrix& f,
                         const CompatOptions& options) {
  const int d = static_cast<int>(e.rows());
  if (f.rows() != d || e.cols() != d || f.cols() != d) {
    throw std::invalid_argument("pair_effect_value: dimension mismatch");
  }
  for (const auto* m : {&e, &f}) {
    if (!is_hermitian(*m, options.tol.herm * std::max(1.0, max_abs(*m)))) {
      throw std::invalid_argument("pair_effect_value: effect not Hermitian");
    }
    const auto eig = eig_hermitian(*m, options.tol);
    if (eig.values(0) < -options.tol.psd ||
        eig.values(d - 1) > 1.0 + options.tol.psd) {
      throw std::invalid_argument(
          "pair_effect_value: input is not an effect (0 <= E <= I)");
    }
  }
  SdpInstance inst;
  const int x = inst.add_block("X", d);
  const int s1 = inst.add_block("E-X", d);
  const int s2 = inst.add_block("F-X", d);
  const int s3 = inst.add_block("slack", d);
  const int lam = inst.add_scalar("lambda");
  inst.add_matrix_equality({{x, 1.0}, {s1, 1.0}}, {}, hermitize(e));
  inst.add_matrix_equality({{x, 1.0}, {s2, 1.0}}, {}, hermitize(f));
  inst.add_matrix_equality({{x, 1.0}, {s3, -1.0}},
                           {{lam, ComplexMatrix::Identity(d, d)}},
                           hermitize(e + f));
  SdpObjective obj;
  obj.scalar_terms.push_back({lam, 1.0});
  inst.set_objective(SdpSense::Min, obj);
  const auto sol = solve(inst, options.sdp);
  if (sol.status != SdpStatus::Optimal) {
    throw std::runtime_error("pair_effect_value: solver failed (" +
                             sol.message + ")");
  }
  return sol.value;
}

CloningCriterionResult cloning_criterion(const PovmTuple& tuple,
                                         const CompatOptions& options) {
  check_tuple(tuple, options.tol);
  CloningCriterionResult out;
  const double d = tuple.dim;
  for (const auto& p : tuple.povms) {
    double worst = 1.0;
    for (const auto& a : p.effects) {
      const double tr = a.trace().real();
      if (tr <= options.tol.psd * d) {
        throw std::invalid_argument(
            "cloning_criterion: zero-trace effect");
      }
      worst = std::min(worst, d * min_eigenvalue(hermitize(a)) / tr);
    }
    out.s.push_back(std::clamp(1.0 - worst, 0.0, 1.0));
  }
  if (tuple.count() < 2) {
    // single POVMs are always compatible with themselves
    out.verdict = CompatVerdict::Compatible;
    return out;
  }
  CloneParams params{tuple.count(), tuple.dim, out.s};
  out.membership = in_gamma_clone(params, options.sdp);
  out.verdict = out.membership.member ? CompatVerdict::Compatible
                                      : CompatVerdict::Undecided;
  return out;
}

void validate_ensemble(const Ensemble& e, const Tolerances& tol) {
  if (e.states.empty() || e.states.size() != e.probs.size()) {
    throw std::invalid_argument("ensemble: states/probs size mismatch");
  }
  double psum = 0.0;
  for (double p : e.probs) {
    if (p < -1e-12) throw std::invalid_argument("ensemble: negative prob");
    psum += p;
  }
  if (std::abs(psum - 1.0) > 1e-9) {
    throw std::invalid_argument("ensemble: probabilities do not sum to 1");
  }
  for (const auto& sigma : e.states) {
    if (sigma.rows() != e.dim || sigma.cols() != e.dim) {
      throw std::invalid_argument("ensemble: state dimension mismatch");
    }
    if (std::abs(sigma.trace().real() - 1.0) > 1e-9 ||
        std::abs(sigma.trace().imag()) > 1e-9) {
      throw std::invalid_argument("ensemble: state trace is not 1");
    }
    if (min_eigenvalue(hermitize(sigma)) < -tol.psd) {
      throw std::invalid_argument("ensemble: state is not PSD");
    }
  }
}

void validate_super_ensemble(const SuperEnsemble& s, const Tolerances& tol) {
  if (s.ensembles.empty() || s.ensembles.size() != s.probs.size()) {
    throw std::invalid_argument("superensemble: shape mismatch");
  }
  double qsum = 0.0;
  for (double q : s.probs) {
    if (q < -1e-12) throw std::invalid_argument("superensemble: negative q");
    qsum += q;
  }
  if (std::abs(qsum - 1.0) > 1e-9) {
    throw std::invalid_argument("superensemble: q does not sum to 1");
  }
  for (const auto& e : s.ensembles) {
    if (e.dim != s.ensembles[0].dim) {
      throw std::invalid_argument("superensemble: mixed dimensions");
    }
    validate_ensemble(e, tol);
  }
}

namespace {

// max sum_i p_i Tr[sigma_i B_i] over POVMs B
double discrimination_value(const Ensemble& e, const CompatOptions& options) {
  SdpInstance inst;
  const int k = static_cast<int>(e.states.size());
  std::vector<int> blocks(k);
  std::vector<std::pair<int, double>> all;
  for (int i = 0; i < k; ++i) {
    blocks[i] = inst.add_block("B" + std::to_string(i), e.dim);
    all.push_back({blocks[i], 1.0});
  }
  inst.add_matrix_equality(all, {}, ComplexMatrix::Identity(e.dim, e.dim));
  SdpObjective obj;
  for (int i = 0; i < k; ++i) {
    obj.block_terms.push_back({blocks[i], hermitize(e.probs[i] * e.states[i])});
  }
  inst.set_objective(SdpSense::Max, obj);
  const auto sol = solve(inst, options.sdp);
  if (sol.status != SdpStatus::Optimal) {
    throw std::runtime_error("prior_guess: discrimination SDP failed (" +
                             sol.message + ")");
  }
  return sol.value;
}

}  // namespace

double prior_guess(const SuperEnsemble& se, const CompatOptions& options) {
  validate_super_ensemble(se, options.tol);
  double value = 0.0;
  for (std::size_t x = 0; x < se.ensembles.size(); ++x) {
    value += se.probs[x] * discrimination_value(se.ensembles[x], options);
  }
  return value;
}

double post_guess(const SuperEnsemble& se, const CompatOptions& options) {
  validate_super_ensemble(se, options.tol);
  const int d = se.dim();
  const int g = static_cast<int>(se.ensembles.size());
  const auto shape = se.outcome_counts();
  long total = 1;
  for (int k : shape) total *= k;
  if (total * d > options.sdp.variable_dim_cap) {
    throw std::invalid_argument("post_guess: joint POVM exceeds solver cap");
  }

  SdpInstance inst;
  std::vector<int> blocks(total);
  std::vector<std::pair<int, double>> all;
  for (int flat = 0; flat < total; ++flat) {
    blocks[flat] = inst.add_block("G" + std::to_string(flat), d);
    all.push_back({blocks[flat], 1.0});
  }
  inst.add_matrix_equality(all, {}, ComplexMatrix::Identity(d, d));
  SdpObjective obj;
  for (int flat = 0; flat < total; ++flat) {
    ComplexMatrix coeff = ComplexMatrix::Zero(d, d);
    int rest = flat;
    for (int x = g - 1; x >= 0; --x) {
      const int i = rest % shape[x];
      rest /= shape[x];
      coeff += se.probs[x] * se.ensembles[x].probs[i] *
               se.ensembles[x].states[i];
    }
    obj.block_terms.push_back({blocks[flat], hermitize(coeff)});
  }
  inst.set_objective(SdpSense::Max, obj);
  const auto sol = solve(inst, options.sdp);
  if (sol.status != SdpStatus::Optimal) {
    throw std::runtime_error("post_guess: SDP failed (" + sol.message + ")");
  }
  return sol.value;
}

double witness_value(const SuperEnsemble& se, const PovmTuple& tuple) {
  validate_super_ensemble(se);
  if (static_cast<int>(se.ensembles.size()) != tuple.count()) {
    throw std::invalid_argument("witness_value: ensemble/POVM count");
  }
  double value = 0.0;
  for (std::size_t x = 0; x < se.ensembles.size(); ++x) {
    const auto& e = se.ensembles[x];
    const auto& p = tuple.povms[x];
    if (static_cast<int>(e.states.size()) != p.outcomes() ||
        e.dim != tuple.dim) {
      throw std::invalid_argument("witness_value: shape mismatch");
    }
    for (std::size_t i = 0; i < e.states.size(); ++i) {
      value += se.probs[x] * e.probs[i] *
               (e.states[i].cwiseProduct(p.effects[i].conjugate()))
                   .sum()
                   .real();
    }
  }
  return value;
}

double restricted_witness_check(const PovmTuple& tuple, const Subspace& h,
                                int samples, std::uint64_t seed,
                                const CompatOptions& options) {
  check_tuple(tuple, options.tol);
  if (h.ambient_dim != tuple.dim || h.dim() < 1) {
    throw std::invalid_argument("restricted_witness_check: bad subspace");
  }
  const int r = h.dim();
  const ComplexMatrix v = h.basis;
  const int g = tuple.count();
  const auto shape = tuple.outcome_counts();

  Rng rng(seed);
  double worst = -std::numeric_limits<double>::infinity();
  for (int sample = 0; sample < samples; ++sample) {
    // reduced states (r x r) and their lifts to the ambient space
    SuperEnsemble reduced, lifted;
    reduced.probs.assign(g, 1.0 / g);
    lifted.probs = reduced.probs;
    bool ok = true;
    for (int x = 0; x < g && ok; ++x) {
      Ensemble er, el;
      er.dim = r;
      el.dim = tuple.dim;
      const int k = shape[x];
      er.probs.assign(k, 1.0 / k);
      el.probs = er.probs;
      for (int i = 0; i < k && ok; ++i) {
        ComplexVector w(r);
        if (sample == 0) {
          // deterministic candidate aligned with the measurement: the top
          // eigenvector of the effect compressed to the subspace
          const ComplexMatrix compressed =
              hermitize(v.adjoint() * tuple.povms[x].effects[i] * v);
          Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(compressed);
          w = es.eigenvectors().col(r - 1);
          if (es.eigenvalues()(r - 1) < 1e-12) ok = false;
        } else {
          for (int q = 0; q < r; ++q) w(q) = rng.complex_gaussian();
          w.normalize();
        }
        er.states.push_back(w * w.adjoint());
        const ComplexVector wl = v * w;
        el.states.push_back(wl * wl.adjoint());
      }
      reduced.ensembles.push_back(std::move(er));
      lifted.ensembles.push_back(std::move(el));
    }
    if (!ok) continue;
    // P_post of a superensemble supported on h equals P_post of its
    // compression to h, which is a much smaller program.
    const double post = post_guess(reduced, options);
    const double pairing = witness_value(lifted, tuple);
    worst = std::max(worst, pairing - post);
  }
  return worst;
}

std::vector<double> dimension_noise_threshold(
    const std::vector<int>& outcome_counts, int r) {
  if (r < 1) {
    throw std::invalid_argument("dimension_noise_threshold: r >= 1 required");
  }
  std::vector<double> t;
  t.reserve(outcome_counts.size());
  for (int k : outcome_counts) {
    if (k < 2) {
      throw std::invalid_argument(
          "dimension_noise_threshold: POVMs need at least 2 outcomes");
    }
    t.push_back(1.0 / (2.0 * r * (k - 1)));
  }
  return t;
}

}  // namespace qcompat
