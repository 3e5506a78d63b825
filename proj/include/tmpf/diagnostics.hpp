#pragma once

#include <vector>

#include "tmpf/interpolant.hpp"
#include "tmpf/stepper.hpp"

namespace tmpf {

// ---------------------------------------------------------------------------
// Energy audit: the exact discrete mechanical balance obtained by testing the
// displacement equation with v = kappa * delta_tau u_n, stresses measured in
// the edge quadrature in which the identity telescopes algebraically.
// ---------------------------------------------------------------------------

struct EnergyAuditRow {
  int n = 0;              // step producing level n+1
  double energy = 0.0;    // kappa/2 |dtau u_n|^2 + 1/2 ||sigma_{n+1}||^2 (edge)
  double dissipation = 0.0;
  double gamma_work = 0.0;  // tau <sigma_{n+1}, e dtau gamma(chi_n)>
  double load_work = 0.0;   // tau kappa (B_n, dtau u_n) + tau kappa <b_n, dtau u_n>_Gamma
  double residual = 0.0;    // per-step identity defect
  double residual_rel = 0.0;
};

struct EnergyAudit {
  double initial_energy = 0.0;  // kappa/2 |dtau u_{-1}|^2 + 1/2 ||sigma_0||^2
  std::vector<EnergyAuditRow> rows;
  double max_residual_rel = 0.0;
  bool nonincreasing = true;  // energy monotone when gamma/load work vanish
  double tolerance = 0.0;     // the bound the residuals were checked against (0 = unchecked)
};

EnergyAudit energy_audit(const Trajectory& traj);

// ---------------------------------------------------------------------------
// Entropy, mass, positivity monitors
// ---------------------------------------------------------------------------

struct EntropyMassRow {
  int n = 0;
  double t = 0.0;
  double mass_w = 0.0;       // int w_n
  double entropy = 0.0;      // -int ln(theta_n + eps), floored integrand
  int floored_nodes = 0;     // nodes where theta_n + eps <= 0 (hostile runs)
  double theta_min = 0.0;
  double budget_residual = 0.0;  // v=1 on the discrete theta equation (exact form)
  double w_budget_gap = 0.0;     // monitor: int w_n vs the w-form accumulation
};

struct EntropyMassSeries {
  std::vector<EntropyMassRow> rows;  // one per level
  double max_budget_residual = 0.0;
  double max_entropy = 0.0;
  double min_theta = 0.0;
  bool positivity_violated = false;
};

EntropyMassSeries entropy_mass_positivity(const Trajectory& traj);

// ---------------------------------------------------------------------------
// Truncation-function level-set energies
// ---------------------------------------------------------------------------

/// T_k(r) = int_0^r min{(s-k)^+, 1} ds, in closed form.
double truncation_Tk(double r, int k);

struct LevelSetRow {
  int k = 0;
  double measure = 0.0;      // |Q^k| in node-time quadrature
  double grad_energy = 0.0;  // int_{Q^k} |grad w|^2
  double Tk_gain = 0.0;      // int T_k(w(T)) - int T_k(w(0))
};

struct LevelSetTable {
  std::vector<LevelSetRow> rows;
  double max_grad_energy = 0.0;
  double uncovered_measure = 0.0;  // node-time mass with w < 0 or w >= k_max+1
};

LevelSetTable level_set_energies(const Trajectory& traj, int k_max);

// ---------------------------------------------------------------------------
// A priori norm ledger
// ---------------------------------------------------------------------------

struct AprioriLedger {
  // first-estimate quantities, max over 0 <= m < N
  double max_dtau_u = 0.0;
  double max_sigma = 0.0;
  double max_chi_V = 0.0;
  double sum_dtau_chi_sq = 0.0;       // tau sum ||dtau chi_n||^2
  double sum_grad_dtau_chi_sq = 0.0;  // tau sum ||grad dtau chi_n||^2
  // second estimate
  double sum_dtau_theta_sq = 0.0;
  double max_theta_V = 0.0;
  // third estimate, 0 <= m <= N-2
  double max_dtau2_u = 0.0;
  double max_dtau_sigma = 0.0;
  double sum_dtau2_chi_V_sq = 0.0;
  double max_grad_dtau_chi = 0.0;
  // Lq surrogates over Q for q in {1, 1.2}
  double w_Lq[2] = {0.0, 0.0};
  double w_W1q[2] = {0.0, 0.0};
  double theta_Lq[2] = {0.0, 0.0};
  double theta_W1q[2] = {0.0, 0.0};
  // recursion-bound chain: worst signed margin of the inequality
  // (tau/eps) sum ||z_{n+1}||^2 + ||z_{m+1}||^2 <= ||z_0||^2 + eps tau sum ||f_n||^2
  double tecnico_worst_margin = 0.0;  // max over m of lhs - rhs (<= slack when OK)
  bool tecnico_ok = true;
  // difference-quotient inequalities on trajectory data
  double lipschitz_worst = 0.0;  // max of |dtau G_eps(chi)| - sup|G'| |dtau chi| (nodewise)
  double convexity_worst = 0.0;  // max of dtau F1_eps(chi) - beta(chi_{n+1}) dtau chi
  // cross-check: tau sum ||dtau chi||^2 against the L2(Q) norm of dt chi-hat
  double dtchi_crosscheck_residual = 0.0;
  // interpolant identity residual on the trajectory's chi levels (field-valued)
  double field_interp_residual = 0.0;
};

AprioriLedger apriori_ledger(const Trajectory& traj);

struct DiagnosticsReport {
  EnergyAudit energy;
  EntropyMassSeries entropy;
  LevelSetTable level_sets;
  AprioriLedger ledger;
};

DiagnosticsReport full_diagnostics(const Trajectory& traj, int k_max = 8);

// Edge-stress helpers shared with tests: per-axis edge stress of a level.
std::vector<double> edge_stress(const Grid& g, const ScalarField& u, const ScalarField& gamma_chi,
                                const std::array<double, 2>& e, int axis, double kappa);

}  // namespace tmpf
