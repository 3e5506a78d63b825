// Command-line driver: single runs, tau/eps refinement studies, and the
// property-verification suite. Exit codes: 0 success, 1 config error,
// 2 solver failure, 3 property failure.

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "tmpf/experiments.hpp"

using namespace tmpf;

namespace {

ExperimentConfig load_or_default(const std::string& config_path, const std::string& preset) {
  if (!config_path.empty()) return ExperimentConfig::load_file(config_path);
  return ExperimentConfig::preset(preset);
}

int cmd_run(const std::string& config_path, const std::string& preset, const std::string& out,
            int snapshots) {
  ExperimentConfig cfg = load_or_default(config_path, preset);
  if (!out.empty()) cfg.out_dir = out;
  if (snapshots >= 0) cfg.snapshot_stride = snapshots;
  RunResult r = run_experiment(cfg, cfg.out_dir);
  std::printf("run: N=%d tau=%s eps=%s  wall=%.2fs\n", cfg.N, format_double(cfg.T / cfg.N).c_str(),
              format_double(cfg.eps).c_str(), r.summary.wall_time_s);
  if (!r.summary.completed) {
    std::fprintf(stderr, "solver failure: %s\n", r.summary.error.c_str());
    return 2;
  }
  std::printf("  min theta = %s, max entropy = %s\n", format_double(r.summary.min_theta).c_str(),
              format_double(r.summary.max_entropy).c_str());
  std::printf("  mass-budget residual (max) = %s, energy residual (max rel) = %s\n",
              format_double(r.summary.max_budget_residual).c_str(),
              format_double(r.summary.max_energy_residual_rel).c_str());
  std::printf("  outputs in %s\n", cfg.out_dir.c_str());
  return 0;
}

int cmd_converge_tau(const std::string& config_path, const std::string& preset, int levels,
                     const std::string& out) {
  ExperimentConfig cfg = load_or_default(config_path, preset);
  TauConvergenceTable t = converge_tau(cfg, levels, out.empty() ? cfg.out_dir : out);
  std::printf("%8s %12s %14s %14s %14s %10s %10s\n", "N", "tau", "d_chi_C0L2", "d_theta_L2Q",
              "d_u_C0L2", "ratio_chi", "order_chi");
  for (const auto& r : t.rows)
    std::printf("%8d %12.5g %14.6g %14.6g %14.6g %10.3f %10.3f\n", r.N, r.tau, r.d_chi_C0L2,
                r.d_theta_L2Q, r.d_u_C0L2, r.ratio_chi, r.order_chi);
  std::printf("chi decreasing: %s, theta decreasing: %s\n",
              t.chi_strictly_decreasing ? "yes" : "no",
              t.theta_strictly_decreasing ? "yes" : "no");
  return 0;
}

int cmd_converge_eps(const std::string& config_path, const std::string& preset, int levels,
                     const std::string& out) {
  ExperimentConfig cfg = load_or_default(config_path, preset);
  EpsConvergenceTable t = converge_eps(cfg, levels, out.empty() ? cfg.out_dir : out);
  std::printf("%10s %14s %14s %14s %16s %18s\n", "eps", "d_theta_L1Q", "d_chi_C0L2", "d_u_C0L2",
              "eps*|grad dX|^2", "sqrt(eps)|lap chi0|");
  for (const auto& r : t.rows)
    std::printf("%10.5g %14.6g %14.6g %14.6g %16.6g %18.6g\n", r.eps, r.d_theta_L1Q, r.d_chi_C0L2,
                r.d_u_C0L2, r.eps_grad_dtchi_sq, r.sqrt_eps_lap_chi0);
  std::printf("chi decreasing: %s, u decreasing: %s, lap-chi0 max/min = %.3f\n",
              t.chi_strictly_decreasing ? "yes" : "no", t.u_strictly_decreasing ? "yes" : "no",
              t.lap_chi0_max_over_min);
  return 0;
}

int cmd_verify(std::uint64_t seed) {
  VerifyReport rep = verify_suite(seed);
  for (const SuiteResult& s : rep.suites)
    std::printf("[%s] %s%s%s\n", s.passed ? "PASS" : "FAIL", s.name.c_str(),
                s.detail.empty() ? "" : ": ", s.detail.c_str());
  return rep.all_passed ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coupled thermo-mechanical phase-field solver"};
  app.require_subcommand(1);

  std::string config_path, out_dir, preset = "default";
  int levels = 3;
  int snapshots = -1;
  std::uint64_t seed = 12345;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file");
    cmd->add_option("--preset", preset, "built-in experiment preset when no config is given");
    cmd->add_option("--out", out_dir, "output directory");
  };

  CLI::App* run = app.add_subcommand("run", "run one experiment");
  add_common(run);
  run->add_option("--snapshots", snapshots, "snapshot stride (0 disables)");

  CLI::App* ctau = app.add_subcommand("converge-tau", "tau-refinement Cauchy study");
  add_common(ctau);
  ctau->add_option("--levels", levels, "number of halvings (>= 3)");

  CLI::App* ceps = app.add_subcommand("converge-eps", "eps-refinement Cauchy study");
  add_common(ceps);
  ceps->add_option("--levels", levels, "number of eps levels (>= 3)");

  CLI::App* ver = app.add_subcommand("verify", "run the property-verification suites");
  ver->add_option("--seed", seed, "seed for randomized property tests");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, preset, out_dir, snapshots);
    if (ctau->parsed()) return cmd_converge_tau(config_path, preset, levels, out_dir);
    if (ceps->parsed()) return cmd_converge_eps(config_path, preset, levels, out_dir);
    if (ver->parsed()) return cmd_verify(seed);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const SolverError& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
