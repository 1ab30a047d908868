#include "qcompat/repro.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <stdexcept>

#include "qcompat/cloning.hpp"
#include "qcompat/compat.hpp"
#include "qcompat/constructions.hpp"
#include "qcompat/dim_search.hpp"

namespace qcompat {

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

PovmTuple basis_pair(const ComplexMatrix& a, const ComplexMatrix& b) {
  PovmTuple t;
  t.dim = static_cast<int>(a.rows());
  t.povms = {von_neumann_povm(a), von_neumann_povm(b)};
  return t;
}

CaseResult case_qutrit_value(std::uint64_t) {
  CaseResult res;
  res.name = "qutrit-1.577";
  res.expected = "1.577";
  res.tolerance = "0.01";
  ComplexMatrix e = ComplexMatrix::Zero(3, 3);
  e(0, 0) = 1.0;
  e(1, 1) = 1.0;
  const ComplexMatrix f3 = fourier_matrix(3);
  const ComplexMatrix f = hermitize(f3.col(0) * f3.col(0).adjoint() +
                                    f3.col(1) * f3.col(1).adjoint());
  const double value = pair_effect_value(e, f);
  res.computed = fmt(value);
  res.pass = std::abs(value - 1.577) <= 0.01;
  res.details = "min-lambda program on the computational/Fourier projectors";
  return res;
}

CaseResult case_sec4(std::uint64_t seed) {
  CaseResult res;
  res.name = "sec4-example";
  res.expected = "R >= 3 and Rbar <= 2";
  res.tolerance = "exact verdicts";

  ComplexMatrix b = ComplexMatrix::Zero(5, 5);
  const double s = 1.0 / std::sqrt(2.0);
  b(0, 0) = s;  b(1, 0) = s;
  b(0, 1) = s;  b(1, 1) = -s;
  b(2, 2) = s;  b(3, 2) = s;
  b(2, 3) = s;  b(3, 3) = -s;
  b(4, 4) = 1.0;
  PovmTuple t = basis_pair(ComplexMatrix::Identity(5, 5), b);

  SearchBudget budget;
  budget.restarts = 8;
  budget.steps = 40;
  budget.seed = seed;

  const auto cert = certify_R_at_least(t, 3, budget);
  bool cert_ok = false;
  if (cert.found) {
    cert_ok = joint_measurability(reduce(t, *cert.isometry)).verdict ==
              CompatVerdict::Compatible;
  }
  const auto fal = falsify_Rbar_at_least(t, 3, budget);
  bool fal_ok = false;
  if (fal.found) {
    fal_ok = joint_measurability(reduce(t, *fal.isometry)).verdict ==
             CompatVerdict::Incompatible;
  }
  res.pass = cert_ok && fal_ok;
  res.computed = std::string("certificate ") + (cert_ok ? "found" : "missing") +
                 ", falsifier " + (fal_ok ? "found" : "missing");
  res.details = "certificate via " + (cert.found ? cert.provenance : "-") +
                ", falsifier via " + (fal.found ? fal.provenance : "-");
  return res;
}

CaseResult case_mub_thresholds(std::uint64_t) {
  CaseResult res;
  res.name = "mub-thresholds";
  res.tolerance = "1e-3";
  double worst = 0.0;
  std::string expected, computed;
  for (int d : {2, 3, 4}) {
    const PovmTuple pair = basis_pair(ComplexMatrix::Identity(d, d),
                                      fourier_matrix(d));
    const auto rob = noise_robustness(pair);
    const double formula = 0.5 * (1.0 + 1.0 / (1.0 + std::sqrt(double(d))));
    if (rob.status != SdpStatus::Optimal) {
      res.computed = "solver failure at d=" + std::to_string(d);
      return res;
    }
    worst = std::max(worst, std::abs(rob.t_star - formula));
    expected += (expected.empty() ? "" : ", ") + fmt(formula);
    computed += (computed.empty() ? "" : ", ") + fmt(rob.t_star);
  }
  res.expected = expected;
  res.computed = computed;
  res.pass = worst <= 1e-3;
  res.details = "worst deviation " + fmt(worst);
  return res;
}

CaseResult case_lambda_interval_d5(std::uint64_t) {
  CaseResult res;
  res.name = "lambda-interval-d5";
  res.expected = "incompatible tuple, compatible rank-2 truncation";
  res.tolerance = "exact verdicts";
  const double lambda = 0.66;
  const auto window = lambda_interval(2, 5);
  if (!window.contains(lambda)) {
    res.computed = "0.66 outside the noise window";
    return res;
  }
  auto fam = mub_family(5, 3);
  PovmTuple noisy = apply_noise(basis_pair(fam.bases[0], fam.bases[1]),
                                {lambda, lambda});
  const auto full = joint_measurability(noisy);
  const Isometry v = mub_truncation_isometry(fam.bases[2], 2);
  const auto reduced = joint_measurability(reduce(noisy, v));
  res.computed = "tuple " + to_string(full.verdict) + ", truncation " +
                 to_string(reduced.verdict);
  res.pass = full.verdict == CompatVerdict::Incompatible &&
             reduced.verdict == CompatVerdict::Compatible;
  res.details = "lambda = 0.66 in (" + fmt(window.lo) + ", " +
                fmt(window.hi) + "], robustness " + fmt(full.robustness);
  return res;
}

CaseResult case_spin_k1(std::uint64_t) {
  CaseResult res;
  res.name = "spin-k1-sqrt3";
  const double expected = 1.0 / std::sqrt(3.0);
  res.expected = fmt(expected);
  res.tolerance = "1e-3";
  const auto rob = noise_robustness(spin_povms(1));
  if (rob.status != SdpStatus::Optimal) {
    res.computed = "solver failure";
    return res;
  }
  res.computed = fmt(rob.t_star);
  res.pass = std::abs(rob.t_star - expected) <= 1e-3;
  res.details = "symmetric robustness of the three Pauli measurements";
  return res;
}

CaseResult case_zeta_f4(std::uint64_t) {
  CaseResult res;
  res.name = "zeta-F4";
  res.expected = "bound >= 2 with the known eigenspace";
  res.tolerance = "subspace distance 1e-7";
  const ComplexMatrix f4 = fourier_matrix(4);
  const auto cert = zeta_lower_bound(f4, ZetaStrategy::EigenvalueClusters);
  ComplexVector v1(4), v2(4);
  v1 << 1, 0, 1, 0;
  v2 << 2, 1, 0, 1;
  const double dist = std::max(cert.subspace.distance(v1.normalized()),
                               cert.subspace.distance(v2.normalized()));
  const auto reduced = joint_measurability(
      reduce(basis_pair(ComplexMatrix::Identity(4, 4), f4),
             cert.subspace.isometry()));
  res.computed = "bound " + std::to_string(cert.bound) + ", distance " +
                 fmt(dist) + ", reduction " + to_string(reduced.verdict);
  res.pass = cert.bound >= 2 && dist <= 1e-7 &&
             reduced.verdict == CompatVerdict::Compatible;
  res.details = "kernel defect " + fmt(zeta_certificate_defect(f4, cert));
  return res;
}

CaseResult case_cloning_boundary(std::uint64_t) {
  CaseResult res;
  res.name = "cloning-boundary";
  res.expected = "symmetric residuals <= 1e-9; grid agreement";
  res.tolerance = "boundary band 1e-3";
  double worst_residual = 0.0;
  for (int d = 2; d <= 6; ++d) {
    const double s = (d + 2.0) / (2.0 * (d + 1.0));
    worst_residual =
        std::max(worst_residual, std::abs(boundary_residual({2, d, {s, s}})));
  }
  int mismatches = 0, compared = 0;
  const int n = 21;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      CloneParams p{2, 2, {i / (n - 1.0), j / (n - 1.0)}};
      const auto analytic = in_gamma_clone(p);
      if (analytic.method == CloneMethod::BoundaryBisection &&
          std::abs(analytic.alpha_star - 1.0) *
                  std::max(p.s[0], p.s[1]) <= 1e-3) {
        continue;
      }
      const auto oracle = clone_choi_feasible(p);
      if (oracle.verdict == FeasVerdict::Undecided) continue;
      ++compared;
      if (analytic.member != (oracle.verdict == FeasVerdict::Feasible)) {
        ++mismatches;
      }
    }
  }
  res.computed = "worst residual " + fmt(worst_residual) + ", " +
                 std::to_string(mismatches) + " mismatches on " +
                 std::to_string(compared) + " grid points";
  res.pass = worst_residual <= 1e-9 && mismatches == 0 && compared > 300;
  return res;
}

using CaseFn = std::function<CaseResult(std::uint64_t)>;

const std::vector<std::pair<std::string, CaseFn>>& registry() {
  static const std::vector<std::pair<std::string, CaseFn>> cases = {
      {"qutrit-1.577", case_qutrit_value},
      {"sec4-example", case_sec4},
      {"mub-thresholds", case_mub_thresholds},
      {"lambda-interval-d5", case_lambda_interval_d5},
      {"spin-k1-sqrt3", case_spin_k1},
      {"zeta-F4", case_zeta_f4},
      {"cloning-boundary", case_cloning_boundary},
  };
  return cases;
}

}  // namespace

std::vector<std::string> repro_case_names() {
  std::vector<std::string> names;
  for (const auto& [name, fn] : registry()) names.push_back(name);
  return names;
}

CaseResult run_repro_case(const std::string& name, std::uint64_t seed) {
  for (const auto& [key, fn] : registry()) {
    if (key == name) {
      const auto start = std::chrono::steady_clock::now();
      CaseResult res = fn(seed);
      res.seconds = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - start)
                        .count();
      return res;
    }
  }
  throw std::invalid_argument("unknown repro case: " + name);
}

std::vector<CaseResult> run_all_repro_cases(std::uint64_t seed) {
  std::vector<CaseResult> out;
  for (const auto& [name, fn] : registry()) {
    out.push_back(run_repro_case(name, seed));
  }
  return out;
}

}  // namespace qcompat
