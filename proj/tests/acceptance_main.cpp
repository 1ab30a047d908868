// Acceptance suite: every criterion runs end to end at its stated tolerance
// and timing budget and prints one PASS/FAIL line. The exit code is the
// number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "qcompat/cloning.hpp"
#include "qcompat/compat.hpp"
#include "qcompat/constructions.hpp"
#include "qcompat/dim_search.hpp"
#include "qcompat/repro.hpp"
#include "qcompat/rng.hpp"

using namespace qcompat;

namespace {

struct Criterion {
  std::string name;
  double budget_seconds;
  std::function<std::pair<bool, std::string>()> run;
};

ComplexMatrix random_psd(int d, Rng& rng) {
  ComplexMatrix g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = rng.complex_gaussian();
  return g * g.adjoint();
}

Povm random_povm(int d, int outcomes, Rng& rng) {
  std::vector<ComplexMatrix> raw;
  ComplexMatrix sum = ComplexMatrix::Zero(d, d);
  for (int i = 0; i < outcomes; ++i) {
    raw.push_back(random_psd(d, rng));
    sum += raw.back();
  }
  auto eig = eig_hermitian(sum);
  const ComplexMatrix inv_sqrt =
      eig.vectors * eig.values.cwiseSqrt().cwiseInverse().asDiagonal() *
      eig.vectors.adjoint();
  Povm p;
  p.dim = d;
  for (auto& e : raw) p.effects.push_back(hermitize(inv_sqrt * e * inv_sqrt));
  return p;
}

ComplexMatrix random_effect(int d, Rng& rng) {
  const ComplexMatrix h = hermitize(random_psd(d, rng));
  auto eig = eig_hermitian(h);
  return (h - eig.values(0) * ComplexMatrix::Identity(d, d)) /
         (eig.values(d - 1) - eig.values(0));
}

std::pair<bool, std::string> from_case(const std::string& name) {
  const CaseResult res = run_repro_case(name, 0);
  return {res.pass, "computed " + res.computed + " vs " + res.expected};
}

std::pair<bool, std::string> criterion_spin() {
  const auto rob = noise_robustness(spin_povms(1));
  const double target = 1.0 / std::sqrt(3.0);
  if (rob.status != SdpStatus::Optimal ||
      std::abs(rob.t_star - target) > 1e-3) {
    return {false, "symmetric robustness " + std::to_string(rob.t_star)};
  }
  PovmTuple spin1 = spin_povms(1);
  Rng rng(4242);
  int checked = 0;
  while (checked < 20) {
    std::vector<double> t = {rng.uniform(), rng.uniform(), rng.uniform()};
    const double norm = std::sqrt(t[0] * t[0] + t[1] * t[1] + t[2] * t[2]);
    if (std::abs(norm - 1.0) <= 1e-3) continue;
    const auto report = joint_measurability(apply_noise(spin1, t));
    if (report.verdict == CompatVerdict::Undecided ||
        (report.verdict == CompatVerdict::Compatible) != (norm <= 1.0)) {
      return {false, "direction check failed at ||t|| = " +
                         std::to_string(norm)};
    }
    ++checked;
  }
  return {true, "t* = " + std::to_string(rob.t_star) +
                    ", 20 direction spot checks consistent"};
}

std::pair<bool, std::string> criterion_properties() {
  // noise/isometry commutation, 200 random cases at 1e-12
  Rng rng(2024);
  for (int cases = 0; cases < 200; ++cases) {
    const int d = 2 + static_cast<int>(rng.integer() % 5);
    const int r = 1 + static_cast<int>(rng.integer() % d);
    const int g = 1 + static_cast<int>(rng.integer() % 3);
    PovmTuple t;
    t.dim = d;
    std::vector<double> noise;
    for (int x = 0; x < g; ++x) {
      t.povms.push_back(
          random_povm(d, 2 + static_cast<int>(rng.integer() % 3), rng));
      noise.push_back(rng.uniform());
    }
    const Isometry v = haar_isometry(d, r, rng.integer());
    const PovmTuple a = reduce(apply_noise(t, noise), v);
    const PovmTuple b = apply_noise(reduce(t, v), noise);
    for (int x = 0; x < g; ++x) {
      for (std::size_t i = 0; i < a.povms[x].effects.size(); ++i) {
        if (max_abs(a.povms[x].effects[i] - b.povms[x].effects[i]) > 1e-12) {
          return {false, "noise/isometry commutation violated"};
        }
      }
    }
  }

  // commutative reduction post-condition on 100 random qutrit pairs
  Rng rng2(99);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<ComplexMatrix> effects = {random_effect(3, rng2),
                                          random_effect(3, rng2)};
    ReductionOptions opts;
    opts.seed = trial;
    Isometry v{ComplexMatrix::Identity(3, 1)};
    try {
      v = commutative_reduction(effects, 2, opts);
    } catch (const std::exception& ex) {
      return {false, std::string("commutative reduction failed: ") + ex.what()};
    }
    for (const auto& a : effects) {
      const ComplexMatrix red = v.matrix().adjoint() * a * v.matrix();
      if (std::abs(red(0, 1)) > 1e-9) {
        return {false, "cross element " + std::to_string(std::abs(red(0, 1)))};
      }
    }
  }

  // prior >= post on 50 random superensembles
  Rng rng3(123);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 2 + static_cast<int>(rng3.integer() % 2);
    const int g = 2 + static_cast<int>(rng3.integer() % 2);
    SuperEnsemble se;
    for (int x = 0; x < g; ++x) {
      Ensemble e;
      e.dim = d;
      const int k = 2 + static_cast<int>(rng3.integer() % 2);
      for (int i = 0; i < k; ++i) {
        ComplexMatrix rho = random_psd(d, rng3);
        e.states.push_back(rho / rho.trace().real());
      }
      e.probs.assign(k, 1.0 / k);
      se.ensembles.push_back(std::move(e));
    }
    se.probs.assign(g, 1.0 / g);
    if (prior_guess(se) < post_guess(se) - 1e-7) {
      return {false, "prior < post on a random superensemble"};
    }
  }

  // certificate round-trip on every compatible verdict
  Rng rng4(777);
  int compatible_seen = 0;
  for (int trial = 0; trial < 24; ++trial) {
    const int d = 2 + static_cast<int>(rng4.integer() % 2);
    PovmTuple t;
    t.dim = d;
    const double noise = 0.4 + 0.6 * rng4.uniform();
    t.povms = {random_povm(d, 2, rng4), random_povm(d, 2, rng4)};
    t = apply_noise(t, {noise, noise});
    const auto report = joint_measurability(t);
    if (report.verdict != CompatVerdict::Compatible) continue;
    ++compatible_seen;
    if (!report.joint || !validate(*report.joint).ok ||
        report.marginal_residual > 1e-7) {
      return {false, "certificate round-trip failed"};
    }
    for (int x = 0; x < t.count(); ++x) {
      const Povm m = marginal(*report.joint, x);
      for (int i = 0; i < m.outcomes(); ++i) {
        if (max_abs(m.effects[i] - t.povms[x].effects[i]) > 1e-7) {
          return {false, "marginal reproduction failed"};
        }
      }
    }
  }
  if (compatible_seen < 5) return {false, "too few compatible samples"};
  return {true, "commutation x200, reduction x100, guessing x50, round-trips"};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"1 qutrit SDP value 1.577 +- 0.01", 1.0,
       [] { return from_case("qutrit-1.577"); }},
      {"2 MUB noise thresholds d=2,3,4 +- 1e-3", 10.0,
       [] { return from_case("mub-thresholds"); }},
      {"3 d=5 noisy MUB pair: incompatible, rank-2 truncation compatible",
       30.0, [] { return from_case("lambda-interval-d5"); }},
      {"4 worked example: R >= 3 certificate and Rbar <= 2 falsifier", 60.0,
       [] { return from_case("sec4-example"); }},
      {"5 spin level-1 robustness 1/sqrt(3) and 20 direction checks", 60.0,
       criterion_spin},
      {"6 cloning: 21x21 oracle agreement and boundary residuals", 120.0,
       [] { return from_case("cloning-boundary"); }},
      {"7 zeta on F4: bound 2, known kernel, compatible reduction", 5.0,
       [] { return from_case("zeta-F4"); }},
      {"8 property suites", 600.0, criterion_properties},
  };

  int fails = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::pair<bool, std::string> result{false, "exception"};
    try {
      result = c.run();
    } catch (const std::exception& ex) {
      result = {false, std::string("exception: ") + ex.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    const bool in_budget = secs <= c.budget_seconds;
    const bool pass = result.first && in_budget;
    std::printf("%s criterion %s [%.2fs / budget %.0fs] %s\n",
                pass ? "PASS" : "FAIL", c.name.c_str(), secs,
                c.budget_seconds,
                result.second.c_str());
    if (!pass) ++fails;
  }
  if (fails == 0) {
    std::printf("all %zu acceptance criteria passed\n", criteria.size());
  } else {
    std::printf("%d acceptance criteria FAILED\n", fails);
  }
  return fails;
}
