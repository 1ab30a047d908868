#include "qcompat/dim_search.hpp"

#include <cmath>
#include <stdexcept>

#include "qcompat/rng.hpp"

namespace qcompat {

namespace {

long joint_size(const PovmTuple& tuple, int r) {
  long size = r;
  for (const auto& p : tuple.povms) size *= p.outcomes();
  return size;
}

ComplexMatrix gaussian_matrix(int rows, int cols, Rng& rng) {
  ComplexMatrix g(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) g(i, j) = rng.complex_gaussian();
  return g;
}

double eval_robustness(const PovmTuple& tuple, const Isometry& v,
                       const CompatOptions& options) {
  const auto rob = noise_robustness(reduce(tuple, v), {}, options);
  return rob.status == SdpStatus::Optimal ? rob.t_star : -1.0;
}

bool reduction_compatible(const PovmTuple& tuple, const Isometry& v,
                          const CompatOptions& options) {
  return joint_measurability(reduce(tuple, v), options).verdict ==
         CompatVerdict::Compatible;
}

bool reduction_incompatible(const PovmTuple& tuple, const Isometry& v,
                            const CompatOptions& options) {
  return joint_measurability(reduce(tuple, v), options).verdict ==
         CompatVerdict::Incompatible;
}

// Hill climbing on t*(V); maximize = certify, minimize = falsify. The
// success predicate re-verifies candidates independently.
SearchOutcome hill_search(const PovmTuple& tuple, int r, bool maximize,
                          const SearchBudget& budget,
                          const CompatOptions& options) {
  SearchOutcome out;
  out.best_objective = maximize ? -1.0 : 2.0;
  out.provenance = "search";
  if (r < 1 || r > tuple.dim || joint_size(tuple, r) >
      options.sdp.variable_dim_cap) {
    return out;
  }
  const int d = tuple.dim;
  const double target_band = options.sdp.certificate_ratio * options.sdp.tol;

  auto better = [&](double a, double b) { return maximize ? a > b : a < b; };
  auto is_success = [&](const Isometry& v, double score) {
    if (maximize) {
      return score >= 1.0 - target_band && reduction_compatible(tuple, v,
                                                                options);
    }
    return score < 1.0 - target_band && reduction_incompatible(tuple, v,
                                                               options);
  };

  for (int restart = 0; restart < budget.restarts; ++restart) {
    Rng rng = Rng::derive(budget.seed, restart);
    Isometry v = haar_isometry(d, r, rng.integer());
    double score = eval_robustness(tuple, v, options);
    ++out.evaluations;
    if (score >= 0.0 && better(score, out.best_objective)) {
      out.best_objective = score;
      out.isometry = v;
    }
    if (score >= 0.0 && is_success(v, score)) {
      out.found = true;
      out.isometry = v;
      out.best_objective = score;
      return out;
    }
    double eps = budget.step_scale;
    for (int step = 0; step < budget.steps; ++step) {
      const ComplexMatrix perturbed =
          v.matrix() + eps * gaussian_matrix(d, r, rng);
      Isometry cand = Isometry(orthonormalize(perturbed));
      const double cand_score = eval_robustness(tuple, cand, options);
      ++out.evaluations;
      if (cand_score < 0.0) {
        eps *= 0.7;
        continue;
      }
      if (better(cand_score, score)) {
        v = std::move(cand);
        score = cand_score;
        eps = std::min(eps * 1.25, 1.0);
        if (better(score, out.best_objective)) {
          out.best_objective = score;
          out.isometry = v;
        }
        if (is_success(v, score)) {
          out.found = true;
          out.isometry = v;
          out.best_objective = score;
          return out;
        }
      } else {
        eps *= 0.7;
        if (eps < 1e-8) break;
      }
    }
  }
  return out;
}

}  // namespace

SearchOutcome search_certify(const PovmTuple& tuple, int r,
                             const SearchBudget& budget,
                             const CompatOptions& options) {
  return hill_search(tuple, r, /*maximize=*/true, budget, options);
}

SearchOutcome search_falsify(const PovmTuple& tuple, int r,
                             const SearchBudget& budget,
                             const CompatOptions& options) {
  return hill_search(tuple, r, /*maximize=*/false, budget, options);
}

namespace {

std::vector<ComplexMatrix> all_effects(const PovmTuple& tuple) {
  std::vector<ComplexMatrix> effects;
  for (const auto& p : tuple.povms) {
    for (const auto& e : p.effects) effects.push_back(e);
  }
  return effects;
}

// If both measurements are rank-one projective bases, returns (A, U) with
// basis matrices such that the tuple is unitarily the (computational, U)
// pair.
std::optional<std::pair<ComplexMatrix, ComplexMatrix>> two_basis_structure(
    const PovmTuple& tuple, const Tolerances& tol) {
  if (tuple.count() != 2) return std::nullopt;
  const int d = tuple.dim;
  std::vector<ComplexMatrix> bases;
  for (const auto& p : tuple.povms) {
    if (p.outcomes() != d) return std::nullopt;
    ComplexMatrix basis(d, d);
    for (int i = 0; i < d; ++i) {
      const auto eig = eig_hermitian(p.effects[i], tol);
      // rank-one projection: top eigenvalue 1, the rest 0
      if (std::abs(eig.values(d - 1) - 1.0) > 1e-8 ||
          (d > 1 && std::abs(eig.values(d - 2)) > 1e-8)) {
        return std::nullopt;
      }
      basis.col(i) = eig.vectors.col(d - 1);
    }
    bases.push_back(std::move(basis));
  }
  return std::make_pair(bases[0], bases[1]);
}

struct StructuralCertificate {
  Isometry isometry;
  std::string provenance;
};

// Cheap exact constructions tried before any randomized search, in a fixed
// order: MUB truncation, commutative reduction, scalar reduction (pairs),
// then the generalized-permutation kernel bound for two von Neumann bases.
std::optional<StructuralCertificate> structural_certificate(
    const PovmTuple& tuple, int r, const SearchBudget& budget,
    const CompatOptions& options) {
  const int d = tuple.dim;

  if (tuple.metadata && tuple.metadata->mub) {
    const auto& mub = *tuple.metadata->mub;
    const int g = tuple.count();
    if (static_cast<int>(mub.bases.size()) >= g + 1 &&
        static_cast<int>(mub.noise.size()) == g) {
      // trust the annotation only if it reproduces the tuple
      PovmTuple rebuilt;
      rebuilt.dim = d;
      for (int x = 0; x < g; ++x) {
        rebuilt.povms.push_back(von_neumann_povm(mub.bases[x], options.tol));
      }
      rebuilt = apply_noise(rebuilt, mub.noise);
      double defect = 0.0;
      for (int x = 0; x < g; ++x) {
        for (int i = 0; i < tuple.povms[x].outcomes(); ++i) {
          defect = std::max(defect, max_abs(rebuilt.povms[x].effects[i] -
                                            tuple.povms[x].effects[i]));
        }
      }
      if (defect <= 1e-9 && r >= 2 &&
          in_gamma_clone({g, r, mub.noise}, options.sdp).member) {
        return StructuralCertificate{
            mub_truncation_isometry(mub.bases[g], r, options.tol),
            "mub-truncation"};
      }
    }
  }

  {
    const auto effects = all_effects(tuple);
    ReductionOptions ropts;
    ropts.seed = budget.seed;
    try {
      Isometry v = commutative_reduction(effects, r, ropts, options.tol);
      return StructuralCertificate{std::move(v), "commutative-reduction"};
    } catch (const std::exception&) {
    }
    if (tuple.count() == 2) {
      for (int x = 0; x < 2; ++x) {
        try {
          auto red =
              scalar_reduction(tuple.povms[x].effects, r, ropts, options.tol);
          return StructuralCertificate{std::move(red.isometry),
                                       "scalar-reduction"};
        } catch (const std::exception&) {
        }
      }
    }
  }

  if (auto bases = two_basis_structure(tuple, options.tol)) {
    const ComplexMatrix u = bases->first.adjoint() * bases->second;
    const auto cert = zeta_lower_bound(u, ZetaStrategy::All, options.tol);
    if (cert.bound >= r && zeta_certificate_defect(u, cert) <= 1e-7) {
      // rotate the kernel subspace back to the original frame
      const ComplexMatrix v =
          bases->first * cert.subspace.basis.leftCols(r);
      return StructuralCertificate{Isometry(orthonormalize(v)),
                                   "two-basis-kernel"};
    }
  }
  return std::nullopt;
}

}  // namespace

namespace {

// Verification that works beyond the solver cap: cross-commuting reductions
// and reductions passing the cloning criterion are compatible outright.
bool verify_reduction_compatible(const PovmTuple& tuple, const Isometry& v,
                                 const CompatOptions& options) {
  if (joint_size(tuple, v.reduced_dim()) <= options.sdp.variable_dim_cap) {
    return reduction_compatible(tuple, v, options);
  }
  const PovmTuple red = reduce(tuple, v);
  if (pairwise_commutator_norm(red) <= options.tol.commute) return true;
  try {
    return cloning_criterion(red, options).verdict ==
           CompatVerdict::Compatible;
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

SearchOutcome certify_R_at_least(const PovmTuple& tuple, int r,
                                 const SearchBudget& budget,
                                 const CompatOptions& options) {
  if (r < 1 || r > tuple.dim) {
    throw std::invalid_argument("certify_R_at_least: need 1 <= r <= d");
  }
  SearchOutcome out;

  // compatible tuples certify any rank with a column selection
  if (joint_size(tuple, tuple.dim) <= options.sdp.variable_dim_cap) {
    if (joint_measurability(tuple, options).verdict ==
        CompatVerdict::Compatible) {
      Isometry v(ComplexMatrix::Identity(tuple.dim, tuple.dim).leftCols(r));
      if (reduction_compatible(tuple, v, options)) {
        out.found = true;
        out.isometry = std::move(v);
        out.best_objective = 1.0;
        out.provenance = "tuple-compatible";
        return out;
      }
    }
  }
  if (r == 1) {
    Isometry v(ComplexMatrix::Identity(tuple.dim, 1));
    if (reduction_compatible(tuple, v, options)) {
      out.found = true;
      out.isometry = std::move(v);
      out.best_objective = 1.0;
      out.provenance = "rank-one";
      return out;
    }
  }
  if (auto cert = structural_certificate(tuple, r, budget, options)) {
    if (verify_reduction_compatible(tuple, cert->isometry, options)) {
      out.found = true;
      out.isometry = std::move(cert->isometry);
      out.best_objective = 1.0;
      out.provenance = cert->provenance;
      return out;
    }
  }
  return search_certify(tuple, r, budget, options);
}

SearchOutcome falsify_Rbar_at_least(const PovmTuple& tuple, int r,
                                    const SearchBudget& budget,
                                    const CompatOptions& options) {
  if (r < 1 || r > tuple.dim) {
    throw std::invalid_argument("falsify_Rbar_at_least: need 1 <= r <= d");
  }
  if (r == tuple.dim &&
      joint_size(tuple, r) <= options.sdp.variable_dim_cap) {
    Isometry v{ComplexMatrix::Identity(tuple.dim, tuple.dim)};
    const auto report = joint_measurability(tuple, options);
    if (report.verdict == CompatVerdict::Incompatible) {
      SearchOutcome out;
      out.found = true;
      out.isometry = std::move(v);
      out.best_objective = report.robustness;
      out.provenance = "identity";
      return out;
    }
  }
  return search_falsify(tuple, r, budget, options);
}

int rbar_lower_from_noise_content(const PovmTuple& tuple) {
  int best = tuple.dim;
  for (const auto& p : tuple.povms) {
    const int k = p.outcomes();
    if (k < 2) return 1;
    double lmin = 1.0;
    for (const auto& e : p.effects) {
      lmin = std::min(lmin, min_eigenvalue(hermitize(e)));
    }
    // the tuple is N_t[B] with B a valid POVM iff t >= 1 - k lambda_min
    const double t_min = std::max(0.0, 1.0 - k * lmin);
    if (t_min > 0.0) {
      const double r_max = 1.0 / (2.0 * t_min * (k - 1));
      best = std::min(best, static_cast<int>(std::floor(r_max + 1e-12)));
    }
  }
  return std::max(1, std::min(best, tuple.dim));
}

DimensionBounds bounds_summary(const PovmTuple& tuple,
                               const SearchBudget& budget,
                               const CompatOptions& options) {
  DimensionBounds bounds;
  bounds.hash = tuple_hash(tuple);
  const int d = tuple.dim;

  // Compatible tuples need no search at all.
  if (joint_size(tuple, d) <= options.sdp.variable_dim_cap &&
      joint_measurability(tuple, options).verdict ==
          CompatVerdict::Compatible) {
    Isometry eye{ComplexMatrix::Identity(d, d)};
    bounds.r_lower = {d, "tuple-compatible", eye, true};
    bounds.r_bar_lower = {d, "tuple-compatible", std::nullopt, true};
    bounds.r_bar_upper = {d, "tuple-compatible", std::nullopt, true};
    return bounds;
  }

  // R lower bound: exact constructions scanned over all ranks first, then
  // randomized search only above the best structural rank.
  bounds.r_lower = {1, "rank-one", Isometry(ComplexMatrix::Identity(d, 1)),
                    true};
  for (int r = d - 1; r >= 2; --r) {
    auto cert = structural_certificate(tuple, r, budget, options);
    if (!cert) continue;
    if (verify_reduction_compatible(tuple, cert->isometry, options)) {
      bounds.r_lower = {r, cert->provenance, cert->isometry, true};
      break;
    }
  }
  for (int r = bounds.r_lower.value + 1; r < d; ++r) {
    auto got = search_certify(tuple, r, budget, options);
    if (!got.found) break;
    bounds.r_lower = {r, got.provenance, got.isometry, true};
  }

  // Rbar lower bound from the dimension-dependent noise thresholds.
  const int rbar = rbar_lower_from_noise_content(tuple);
  bounds.r_bar_lower =
      {rbar, rbar > 1 ? "noise-threshold" : "rank-one", std::nullopt, true};

  // Rbar upper bound from falsifiers, scanning downward.
  bounds.r_bar_upper = {d, "ambient", std::nullopt, true};
  for (int r = d; r > std::max(1, bounds.r_bar_lower.value); --r) {
    auto got = falsify_Rbar_at_least(tuple, r, budget, options);
    if (!got.found) break;
    bounds.r_bar_upper = {r - 1, "falsifier@" + std::to_string(r),
                          got.isometry, true};
  }
  return bounds;
}

DimensionBounds spin_noise_bounds(int level, double t) {
  if (level < 1) throw std::invalid_argument("spin_noise_bounds: level >= 1");
  if (t < 0.0 || t > 1.0) {
    throw std::invalid_argument("spin_noise_bounds: t in [0,1]");
  }
  const int g = 2 * level + 1;
  const double dim = std::pow(2.0, level);
  DimensionBounds bounds;
  bounds.hash = "spin-level-" + std::to_string(level);

  // compatible after any rank-r reduction when t <= 1/(2r)
  int rbar_lo = 1;
  if (t > 0.0) {
    rbar_lo = std::max(
        1, std::min<int>(static_cast<int>(std::floor(1.0 / (2.0 * t) + 1e-12)),
                         static_cast<int>(dim)));
  } else {
    rbar_lo = static_cast<int>(dim);
  }
  bounds.r_bar_lower = {rbar_lo, "noise-threshold", std::nullopt, true};

  // the tuple itself is compatible iff ||t (1,...,1)||_2 <= 1
  const bool compatible = t * std::sqrt(static_cast<double>(g)) <= 1.0;
  const int dim_i = static_cast<int>(dim);
  if (compatible) {
    bounds.r_bar_upper = {dim_i, "norm-le-one", std::nullopt, true};
    bounds.r_lower = {dim_i, "norm-le-one", std::nullopt, true};
  } else {
    bounds.r_bar_upper = {dim_i - 1, "norm-gt-one", std::nullopt, true};
    bounds.r_lower = {std::max(1, rbar_lo), "noise-threshold", std::nullopt,
                      true};
  }
  return bounds;
}

}  // namespace qcompat
