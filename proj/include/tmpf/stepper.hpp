#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tmpf/data_prep.hpp"
#include "tmpf/eps_family.hpp"
#include "tmpf/grid.hpp"

namespace tmpf {

struct SchemeParams {
  int N = 200;
  double T = 1.0;
  double tau = 0.005;
  double eps = 0.1;
  double newton_tol = 1e-10;
  double linear_tol = 1e-12;
  int max_newton = 50;

  /// Validates the tau* gate (tau < 1/(theta_c sup|pi'|)), tau <= 1, N >= 2.
  static SchemeParams make(double T, int N, double eps, const ModelFunctions& model,
                           double newton_tol = 1e-10, double linear_tol = 1e-12,
                           int max_newton = 50);
};

struct DiscreteState {
  int n = 0;
  ScalarField theta;
  ScalarField u;
  ScalarField u_prev;  // u_{n-1}
  ScalarField chi;
  VectorField sigma;
};

struct StepInputs {
  ScalarField R;          // slab average
  ScalarField B_omega;    // interior load at n*tau
  BoundaryValues b_gamma; // boundary datum at n*tau
};

struct StepDiagnostics {
  int n = 0;                      // level index produced (n+1 after advancing from n)
  int newton_iterations = 0;
  double newton_residual = 0.0;
  int cg_iterations = 0;          // total inner CG iterations of the step
  double coeff_min = 0.0;         // nodal range of the theta coefficient a_n
  double coeff_max = 0.0;
  double mass_budget_residual = 0.0;  // v = 1 on the discrete theta equation
  double theta_min = 0.0;             // min nodal theta_{n+1}
  double sigma_consistency = 0.0;     // ||sigma - (kappa grad u - gamma_eps(chi) e)||_inf
  double beta_chi_l2 = 0.0;           // ||beta_eps(chi_{n+1})||_L2 (xi proxy)
  double delta_chi_l2 = 0.0;          // ||delta_tau chi_n||_L2
};

struct ChiStepInfo {
  int iterations = 0;
  double residual = 0.0;
  int cg_iterations = 0;
};

/// Level 0 state from prepared data; u_{-1} = u0_eps - tau u0_eps'.
DiscreteState init_state(const PreparedData& prepared, const SchemeParams& params);

/// Step i) of the scheme: the chi equation, solved by damped (semismooth)
/// Newton with CG inner solves. Requires tau < tau*.
ScalarField chi_step(const DiscreteState& state, const SchemeParams& params, const EpsFamily& fam,
                     ChiStepInfo* info = nullptr);

/// Step ii): the theta equation with coefficient a_n = parabolic_coeff(theta_n, chi_n).
ScalarField theta_step(const DiscreteState& state, const ScalarField& chi_np1,
                       const ScalarField& R_n, const SchemeParams& params, const EpsFamily& fam,
                       SolveReport* report = nullptr);

/// Step iii): the displacement equation; returns (u_{n+1}, sigma_{n+1}).
std::pair<ScalarField, VectorField> u_step(const DiscreteState& state, const ScalarField& chi_np1,
                                           const ScalarField& B_n, const BoundaryValues& b_n,
                                           const SchemeParams& params, const EpsFamily& fam,
                                           SolveReport* report = nullptr);

/// One full step i) -> ii) -> iii) plus the sigma update; increments state.n.
StepDiagnostics advance(DiscreteState& state, const StepInputs& inputs, const SchemeParams& params,
                        const EpsFamily& fam);

struct Level {
  ScalarField theta, u, chi;
  VectorField sigma;
};

struct Trajectory {
  Grid grid;
  ModelFunctions model;
  SchemeParams params;
  std::vector<Level> levels;      // N+1 when fully stored
  ScalarField u_minus1;
  std::vector<ScalarField> R;     // forcing vectors, n = 0..N-1
  std::vector<ScalarField> B_omega;
  std::vector<BoundaryValues> b_gamma;
  std::vector<StepDiagnostics> steps;
  bool complete = false;
  std::string error;

  double tau() const { return params.tau; }
  int N() const { return params.N; }
};

/// Drives the scheme over n = 0..N-1. With store_full all levels are kept;
/// otherwise only a 3-level rolling window survives (levels holds first & last).
Trajectory run_scheme(const PreparedData& prepared, const DiscreteForcing& forcing,
                      const SchemeParams& params, const EpsFamily& fam, bool store_full = true);

}  // namespace tmpf
