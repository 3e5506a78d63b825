#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tmpf/config.hpp"
#include "tmpf/diagnostics.hpp"

namespace tmpf {

struct RunSummary {
  json config_echo;
  double wall_time_s = 0.0;
  bool completed = false;
  std::string error;
  double tau = 0.0;
  double tau_star = 0.0;
  bool tau_below_star = false;
  bool floor_applied = false;
  double final_theta_l2 = 0.0, final_chi_l2 = 0.0, final_u_l2 = 0.0;
  double min_theta = 0.0;
  double max_entropy = 0.0;
  double max_budget_residual = 0.0;
  double max_energy_residual_rel = 0.0;
  double max_sigma_consistency = 0.0;

  json to_json() const;
};

struct RunResult {
  Trajectory traj;
  DiagnosticsReport report;
  RunSummary summary;
};

/// Runs one experiment. With a nonempty out_dir writes series.csv, snapshots
/// (at the configured stride) and summary.json; the summary is written even
/// when the run aborts.
RunResult run_experiment(ExperimentConfig cfg, const std::string& out_dir = "");

// ---------------------------------------------------------------------------
// Refinement studies (Cauchy differences through the interpolants)
// ---------------------------------------------------------------------------

struct TauConvergenceRow {
  int N = 0;
  double tau = 0.0;
  double d_chi_C0L2 = 0.0;   // vs the next finer level
  double d_theta_L2Q = 0.0;
  double d_u_C0L2 = 0.0;
  double ratio_chi = 0.0;    // previous difference / this difference
  double ratio_theta = 0.0;
  double order_chi = 0.0;    // log2 of the ratio
  double interp_residual = 0.0;  // field interpolant identity residual of the run
  AprioriLedger ledger;
  double max_entropy = 0.0;
  double max_budget_residual = 0.0;
};

struct TauConvergenceTable {
  std::vector<TauConvergenceRow> rows;  // one per N level; differences on all but the last
  bool chi_strictly_decreasing = false;
  bool theta_strictly_decreasing = false;
  double min_ratio_chi = 0.0, min_ratio_theta = 0.0;
};

TauConvergenceTable converge_tau(const ExperimentConfig& base, int levels,
                                 const std::string& out_dir = "");

struct EpsConvergenceRow {
  double eps = 0.0;
  double d_theta_L1Q = 0.0;  // vs the next smaller eps
  double d_chi_C0L2 = 0.0;
  double d_u_C0L2 = 0.0;
  double eps_grad_dtchi_sq = 0.0;     // eps ||grad dt chi-hat||^2_{L2(Q)}
  double sqrt_eps_lap_chi0 = 0.0;     // sqrt(eps) ||lap chi0_eps||_{L2}
};

struct EpsConvergenceTable {
  std::vector<EpsConvergenceRow> rows;
  bool chi_strictly_decreasing = false;
  bool u_strictly_decreasing = false;
  double lap_chi0_max_over_min = 0.0;
};

EpsConvergenceTable converge_eps(const ExperimentConfig& base, int levels,
                                 const std::string& out_dir = "");

// ---------------------------------------------------------------------------
// Interpolant-based distances between trajectories (shared with tests)
// ---------------------------------------------------------------------------

enum class Component { Theta, U, Chi };
std::vector<ScalarField> component_levels(const Trajectory& traj, Component c);

/// max over the finer knot set of || hat_a(t) - hat_b(t) ||_{L2}.
double c0_l2_distance(const std::vector<ScalarField>& a, double tau_a,
                      const std::vector<ScalarField>& b, double tau_b);
/// L2(Q) norm of forth_a - forth_b (exact: both piecewise constant in time).
double l2q_distance(const std::vector<ScalarField>& a, double tau_a,
                    const std::vector<ScalarField>& b, double tau_b);
/// L1(Q) norm of forth_a - forth_b.
double l1q_distance(const std::vector<ScalarField>& a, double tau_a,
                    const std::vector<ScalarField>& b, double tau_b);

// ---------------------------------------------------------------------------
// Property-verification suites (the `verify` subcommand)
// ---------------------------------------------------------------------------

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct VerifyReport {
  std::vector<SuiteResult> suites;
  bool all_passed = false;
};

struct VerifyOptions {
  // Mutation hook for self-checking: scales lambda_eps inside the kernel-mass
  // suite; anything != 1 must make that suite fail.
  double lambda_scale = 1.0;
};

VerifyReport verify_suite(std::uint64_t seed, const VerifyOptions& opts = {});

}  // namespace tmpf
