// Command line surface: measurement compatibility checks, noise-robustness
// queries, structured constructions, dimension-bound searches, cloning-region
// sweeps, and the reproduction suite.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <atomic>
#include <thread>
#include <iostream>

#include "qcompat/cloning.hpp"
#include "qcompat/compat.hpp"
#include "qcompat/constructions.hpp"
#include "qcompat/dim_search.hpp"
#include "qcompat/json_io.hpp"
#include "qcompat/repro.hpp"

using namespace qcompat;
using nlohmann::json;

namespace {

struct GlobalConfig {
  double tol_sdp = 1e-8;
  double tol_psd = 1e-9;
  int cap = 400;
  std::uint64_t seed = 0;
  std::string output;  // empty = stdout

  CompatOptions compat() const {
    CompatOptions opts;
    opts.tol.sdp = tol_sdp;
    opts.tol.psd = tol_psd;
    opts.sdp.tol = tol_sdp;
    opts.sdp.variable_dim_cap = cap;
    return opts;
  }
};

void emit(const GlobalConfig& cfg, const json& j) {
  if (cfg.output.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    io::save_json_file(cfg.output, j);
  }
}

void emit_text(const GlobalConfig& cfg, const std::string& text) {
  if (cfg.output.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(cfg.output);
    if (!out) throw std::runtime_error("cannot write " + cfg.output);
    out << text;
  }
}

std::string csv_num(double x) {
  if (std::isnan(x)) return "";  // no closed form at this point
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

int cmd_check_compat(const GlobalConfig& cfg, const std::string& tuple_path) {
  const PovmTuple tuple = io::tuple_from_json(io::load_json_file(tuple_path));
  const auto report = joint_measurability(tuple, cfg.compat());
  emit(cfg, io::to_json(report));
  switch (report.verdict) {
    case CompatVerdict::Compatible: return 0;
    case CompatVerdict::Incompatible: return 1;
    case CompatVerdict::Undecided: return 2;
  }
  return 2;
}

int cmd_robustness(const GlobalConfig& cfg, const std::string& tuple_path,
                   const std::vector<double>& direction) {
  const PovmTuple tuple = io::tuple_from_json(io::load_json_file(tuple_path));
  const auto rob = noise_robustness(tuple, direction, cfg.compat());
  json out = {{"t_star", io::round12(rob.t_star)},
              {"status", to_string(rob.status)}};
  if (!direction.empty()) out["direction"] = direction;
  emit(cfg, out);
  return rob.status == SdpStatus::Optimal ? 0 : 2;
}

int cmd_reduce(const GlobalConfig& cfg, const std::string& tuple_path,
               const std::string& isometry_path) {
  const PovmTuple tuple = io::tuple_from_json(io::load_json_file(tuple_path));
  const Isometry v = io::isometry_from_json(io::load_json_file(isometry_path));
  PovmTuple reduced = reduce(tuple, v);
  reduced.metadata.reset();  // annotations do not survive reduction
  emit(cfg, io::to_json(reduced));
  return 0;
}

int cmd_zeta(const GlobalConfig& cfg, const std::string& unitary_path,
             const std::string& strategy) {
  const ComplexMatrix u = io::matrix_from_json(io::load_json_file(unitary_path));
  ZetaStrategy s = ZetaStrategy::All;
  if (strategy == "a") s = ZetaStrategy::EigenvalueClusters;
  else if (strategy == "b") s = ZetaStrategy::DiagonalPhases;
  else if (strategy == "c") s = ZetaStrategy::ExhaustivePermutations;
  else if (strategy != "all") {
    throw std::runtime_error("zeta: strategy must be a, b, c or all");
  }
  const auto cert = zeta_lower_bound(u, s);
  json z = json::array();
  for (int j = 0; j < cert.gperm.z.size(); ++j) {
    z.push_back({io::round12(cert.gperm.z(j).real()),
                 io::round12(cert.gperm.z(j).imag())});
  }
  emit(cfg, {{"bound", cert.bound},
             {"z", std::move(z)},
             {"sigma", cert.gperm.sigma},
             {"subspace", io::to_json(cert.subspace)},
             {"defect", io::round12(zeta_certificate_defect(u, cert))}});
  return 0;
}

int cmd_bounds(const GlobalConfig& cfg, const std::string& tuple_path,
               int spin_level, double spin_noise, const SearchBudget& budget,
               const std::string& cert_out) {
  if (spin_level > 0) {
    emit(cfg, io::to_json(spin_noise_bounds(spin_level, spin_noise)));
    return 0;
  }
  const PovmTuple tuple = io::tuple_from_json(io::load_json_file(tuple_path));
  const auto bounds = bounds_summary(tuple, budget, cfg.compat());
  emit(cfg, io::to_json(bounds));
  if (!cert_out.empty() && bounds.r_lower.certificate) {
    io::CertificateFile cert;
    cert.tuple_hash = bounds.hash;
    cert.kind = "certify";
    cert.rank = bounds.r_lower.value;
    cert.isometry = *bounds.r_lower.certificate;
    io::save_json_file(cert_out, io::to_json(cert));
  }
  return 0;
}

int cmd_certificate(const GlobalConfig& cfg, const std::string& tuple_path,
                    const std::string& cert_path) {
  const PovmTuple tuple = io::tuple_from_json(io::load_json_file(tuple_path));
  const auto cert = io::certificate_from_json(io::load_json_file(cert_path));
  if (cert.tuple_hash != tuple_hash(tuple)) {
    std::cerr << "certificate was issued for tuple " << cert.tuple_hash
              << " but this tuple hashes to " << tuple_hash(tuple)
              << "; refusing to verify\n";
    return 2;
  }
  const auto report =
      joint_measurability(reduce(tuple, cert.isometry), cfg.compat());
  const bool expected_compatible = cert.kind == "certify";
  const bool ok = expected_compatible
                      ? report.verdict == CompatVerdict::Compatible
                      : report.verdict == CompatVerdict::Incompatible;
  emit(cfg, {{"kind", cert.kind},
             {"rank", cert.rank},
             {"verdict", to_string(report.verdict)},
             {"valid", ok}});
  return ok ? 0 : 1;
}

int cmd_clone_region(const GlobalConfig& cfg, int g, int d, int grid,
                     bool with_oracle, int jobs) {
  std::string csv;
  if (g == 2) {
    csv = "s1,s2,analytic_member,alpha_star,boundary_residual";
    if (with_oracle) csv += ",oracle_feasible,oracle_margin";
    csv += "\n";
    struct Row { int i, j; };
    std::vector<Row> rows;
    for (int i = 0; i < grid; ++i) {
      for (int j = 0; j < grid; ++j) rows.push_back({i, j});
    }
    auto compute = [&](const Row& row) {
      const double s1 = row.i / (grid - 1.0), s2 = row.j / (grid - 1.0);
      CloneParams p{g, d, {s1, s2}};
      const auto mem = in_gamma_clone(p);
      std::string line = csv_num(s1) + "," + csv_num(s2) + "," +
                         (mem.member ? "1" : "0") + "," +
                         csv_num(mem.alpha_star) + "," +
                         csv_num(boundary_residual(p));
      if (with_oracle) {
        const auto oracle = clone_choi_feasible(p, cfg.compat().sdp);
        line += std::string(",") +
                (oracle.verdict == FeasVerdict::Feasible ? "1" : "0") + "," +
                csv_num(oracle.margin);
      }
      return line + "\n";
    };
    if (jobs <= 1) {
      for (const auto& row : rows) csv += compute(row);
    } else {
      // worker pool; results are collected in grid order regardless of
      // completion order
      std::vector<std::string> lines(rows.size());
      std::atomic<std::size_t> next{0};
      auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < rows.size();) {
          lines[i] = compute(rows[i]);
        }
      };
      std::vector<std::thread> pool;
      for (int w = 0; w < jobs; ++w) pool.emplace_back(worker);
      for (auto& th : pool) th.join();
      for (const auto& line : lines) csv += line;
    }
  } else {
    csv = "s,analytic_member,alpha_star,boundary_residual\n";
    for (int i = 0; i < grid; ++i) {
      const double s = i / (grid - 1.0);
      CloneParams p{g, d, std::vector<double>(g, s)};
      const auto mem = in_gamma_clone(p);
      csv += csv_num(s) + "," + (mem.member ? "1" : "0") + "," +
             csv_num(mem.alpha_star) + "," +
             csv_num(boundary_residual(p)) + "\n";
    }
  }
  emit_text(cfg, csv);
  return 0;
}

int cmd_witness(const GlobalConfig& cfg, const std::string& se_path,
                const std::string& tuple_path) {
  const SuperEnsemble se =
      io::super_ensemble_from_json(io::load_json_file(se_path));
  const PovmTuple tuple = io::tuple_from_json(io::load_json_file(tuple_path));
  const auto opts = cfg.compat();
  const double pairing = witness_value(se, tuple);
  const double prior = prior_guess(se, opts);
  const double post = post_guess(se, opts);
  emit(cfg, {{"pairing", io::round12(pairing)},
             {"prior", io::round12(prior)},
             {"post", io::round12(post)},
             {"fires", pairing > post + opts.sdp.tol * 10}});
  return 0;
}

int cmd_repro(const GlobalConfig& cfg, const std::string& which) {
  std::vector<CaseResult> results;
  if (which == "all") {
    results = run_all_repro_cases(cfg.seed);
  } else {
    results.push_back(run_repro_case(which, cfg.seed));
  }
  int fails = 0;
  for (const auto& r : results) {
    std::printf("%-20s %-4s expected: %s | computed: %s | tolerance: %s (%.2fs)\n",
                r.name.c_str(), r.pass ? "PASS" : "FAIL", r.expected.c_str(),
                r.computed.c_str(), r.tolerance.c_str(), r.seconds);
    if (!r.details.empty()) std::printf("%22s%s\n", "", r.details.c_str());
    if (!r.pass) ++fails;
  }
  return fails;
}

int cmd_solve_sdp(const GlobalConfig& cfg, const std::string& inst_path) {
  const SdpInstance inst =
      io::sdp_instance_from_json(io::load_json_file(inst_path));
  SdpOptions opts;
  opts.tol = cfg.tol_sdp;
  opts.variable_dim_cap = cfg.cap;
  const auto sol = solve(inst, opts);
  emit(cfg, {{"status", to_string(sol.status)},
             {"value", io::round12(sol.value)},
             {"dual_value", io::round12(sol.dual_value)},
             {"iterations", sol.iterations},
             {"primal_residual", io::round12(sol.primal_residual)},
             {"dual_residual", io::round12(sol.dual_residual)},
             {"gap", io::round12(sol.gap)},
             {"message", sol.message}});
  return sol.status == SdpStatus::Optimal ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quantum measurement compatibility toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalConfig cfg;
  app.add_option("--tol-sdp", cfg.tol_sdp, "solver tolerance (default 1e-8)");
  app.add_option("--tol-psd", cfg.tol_psd,
                 "effect positivity tolerance (default 1e-9)");
  app.add_option("--cap", cfg.cap, "solver variable-dimension cap");
  app.add_option("--seed", cfg.seed, "random seed (default 0)");
  app.add_option("-o,--output", cfg.output, "write output to a file");

  std::string tuple_path, isometry_path, unitary_path, se_path, cert_path;
  std::string inst_path;

  auto* check = app.add_subcommand(
      "check-compat", "joint measurability verdict (exit 0/1/2)");
  check->add_option("tuple", tuple_path, "POVM tuple JSON")->required();

  auto* rob = app.add_subcommand("robustness", "uniform-noise robustness t*");
  rob->add_option("tuple", tuple_path)->required();
  std::vector<double> direction;
  rob->add_option("--direction", direction,
                  "per-POVM noise direction (comma separated)")
      ->delimiter(',');

  auto* red = app.add_subcommand("reduce", "conjugate a tuple by an isometry");
  red->add_option("tuple", tuple_path)->required();
  red->add_option("isometry", isometry_path)->required();

  int mub_dim = 2, mub_count = 2, spin_level = 1, fourier_dim = 2;
  auto* mub = app.add_subcommand("mub", "mutually unbiased bases (prime dim)");
  mub->add_option("--dim", mub_dim)->required();
  mub->add_option("--count", mub_count)->required();

  auto* spin = app.add_subcommand("spin", "spin system and its POVM tuple");
  spin->add_option("--level", spin_level)->required();

  auto* fourier = app.add_subcommand("fourier", "Fourier matrix");
  fourier->add_option("--dim", fourier_dim)->required();

  auto* zeta = app.add_subcommand(
      "zeta", "two-basis compatibility bound from permutation kernels");
  zeta->add_option("unitary", unitary_path)->required();
  std::string strategy = "all";
  zeta->add_option("--strategy", strategy, "a | b | c | all");

  auto* bounds = app.add_subcommand("bounds", "compatibility dimension bounds");
  bounds->add_option("tuple", tuple_path);
  int bounds_spin_level = 0;
  double bounds_spin_noise = 0.0;
  SearchBudget budget;
  bounds->add_option("--spin-level", bounds_spin_level,
                     "bookkeeping mode: spin level (skips the SDP)");
  bounds->add_option("--spin-noise", bounds_spin_noise,
                     "bookkeeping mode: symmetric noise weight");
  bounds->add_option("--restarts", budget.restarts);
  bounds->add_option("--steps", budget.steps);
  bounds->add_option("--step-scale", budget.step_scale);
  std::string cert_out;
  bounds->add_option("--certificate-out", cert_out,
                     "write the rank certificate to a file");

  auto* cert = app.add_subcommand(
      "certificate", "re-verify a certificate against its tuple");
  cert->add_option("tuple", tuple_path)->required();
  cert->add_option("certificate", cert_path)->required();

  auto* clone = app.add_subcommand("clone-region",
                                   "CSV sweep of the cloning region");
  int clone_g = 2, clone_d = 2, clone_grid = 21, jobs = 1;
  bool clone_oracle = false;
  clone->add_option("--g", clone_g)->required();
  clone->add_option("--d", clone_d)->required();
  clone->add_option("--grid", clone_grid);
  clone->add_flag("--oracle", clone_oracle,
                  "also run the Choi oracle per point");
  clone->add_option("--jobs", jobs, "worker pool size (default 1)");

  auto* wit = app.add_subcommand("witness",
                                 "superensemble pairing vs guessing values");
  wit->add_option("superensemble", se_path)->required();
  wit->add_option("tuple", tuple_path)->required();

  auto* repro = app.add_subcommand("repro",
                                   "regenerate the reference numbers");
  std::string repro_case = "all";
  repro->add_option("--case", repro_case, "case name or 'all'");
  bool repro_list = false;
  repro->add_flag("--list", repro_list, "list case names");

  auto* sdp = app.add_subcommand("solve-sdp", "solve a dumped SDP instance");
  sdp->add_option("instance", inst_path)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (check->parsed()) return cmd_check_compat(cfg, tuple_path);
    if (rob->parsed()) return cmd_robustness(cfg, tuple_path, direction);
    if (red->parsed()) return cmd_reduce(cfg, tuple_path, isometry_path);
    if (mub->parsed()) {
      const auto fam = mub_family(mub_dim, mub_count);
      json bases = json::array();
      for (const auto& b : fam.bases) bases.push_back(io::to_json(b));
      emit(cfg, {{"dim", fam.dim},
                 {"bases", std::move(bases)},
                 {"unbiasedness_defect",
                  io::round12(fam.unbiasedness_defect())}});
      return 0;
    }
    if (spin->parsed()) {
      const auto sys = spin_system(spin_level);
      json mats = json::array();
      for (const auto& f : sys.matrices) mats.push_back(io::to_json(f));
      emit(cfg, {{"level", sys.level},
                 {"matrices", std::move(mats)},
                 {"tuple", io::to_json(spin_povms(spin_level))}});
      return 0;
    }
    if (fourier->parsed()) {
      emit(cfg, io::to_json(fourier_matrix(fourier_dim)));
      return 0;
    }
    if (zeta->parsed()) return cmd_zeta(cfg, unitary_path, strategy);
    if (bounds->parsed()) {
      if (bounds_spin_level == 0 && tuple_path.empty()) {
        std::cerr << "bounds: provide a tuple file or --spin-level\n";
        return 2;
      }
      budget.seed = cfg.seed;
      return cmd_bounds(cfg, tuple_path, bounds_spin_level, bounds_spin_noise,
                        budget, cert_out);
    }
    if (cert->parsed()) return cmd_certificate(cfg, tuple_path, cert_path);
    if (clone->parsed()) {
      return cmd_clone_region(cfg, clone_g, clone_d, clone_grid, clone_oracle,
                              jobs);
    }
    if (wit->parsed()) return cmd_witness(cfg, se_path, tuple_path);
    if (repro->parsed()) {
      if (repro_list) {
        for (const auto& name : repro_case_names()) std::printf("%s\n", name.c_str());
        return 0;
      }
      return cmd_repro(cfg, repro_case);
    }
    if (sdp->parsed()) return cmd_solve_sdp(cfg, inst_path);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 70;
  }
  return 2;
}
