#include "tmpf/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tmpf {

SchemeParams SchemeParams::make(double T, int N, double eps, const ModelFunctions& model,
                                double newton_tol, double linear_tol, int max_newton) {
  if (N < 2) throw std::invalid_argument("scheme: N must be at least 2");
  if (!(T > 0.0)) throw std::invalid_argument("scheme: T must be positive");
  SchemeParams p;
  p.N = N;
  p.T = T;
  p.tau = T / N;
  p.eps = eps;
  p.newton_tol = newton_tol;
  p.linear_tol = linear_tol;
  p.max_newton = max_newton;
  if (p.tau > 1.0) throw std::invalid_argument("scheme: tau must not exceed 1");
  const double ts = model.tau_star();
  if (!(p.tau < ts)) {
    std::ostringstream os;
    os << "scheme: tau = " << p.tau << " refused, tau* = 1/(theta_c sup|pi'|) = " << ts;
    throw std::invalid_argument(os.str());
  }
  return p;
}

DiscreteState init_state(const PreparedData& prepared, const SchemeParams& params) {
  require_same_grid(prepared.theta0_eps.grid, prepared.u0_eps.grid, "init_state");
  require_same_grid(prepared.theta0_eps.grid, prepared.chi0_eps.grid, "init_state");
  DiscreteState s;
  s.n = 0;
  s.theta = prepared.theta0_eps;
  s.u = prepared.u0_eps;
  s.chi = prepared.chi0_eps;
  s.sigma = prepared.sigma0_eps;
  s.u_prev = prepared.u0_eps;
  s.u_prev.axpy(-params.tau, prepared.u0_prime_eps);  // u_{-1} = u_0 - tau u_0'
  return s;
}

ScalarField chi_step(const DiscreteState& state, const SchemeParams& params, const EpsFamily& fam,
                     ChiStepInfo* info) {
  const Grid& g = state.chi.grid;
  const ModelFunctions& m = fam.model();
  const double tau = params.tau, eps = fam.eps();
  if (!(tau < m.tau_star())) throw std::invalid_argument("chi_step: tau >= tau*");

  // f_{1,n} = chi_n/tau - (eps/tau) lap chi_n - alpha_eps(theta_n) G_eps'(chi_n)
  //           + (sigma_n . e) gamma_eps'(chi_n)
  ScalarField lap_chi = laplacian_neumann(state.chi);
  ScalarField sig_e = state.sigma.dot(m.e);
  ScalarField f(g);
  for (int k = 0; k < g.count(); ++k)
    f[k] = state.chi[k] / tau - (eps / tau) * lap_chi[k] -
           fam.alpha(state.theta[k], 0) * fam.G(state.chi[k], 1) +
           sig_e[k] * fam.gamma(state.chi[k], 1);

  const double visc = 1.0 + eps / tau;
  auto residual = [&](const ScalarField& x, ScalarField& res) {
    res = laplacian_neumann(x);
    for (int k = 0; k < g.count(); ++k)
      res[k] = x[k] / tau - visc * res[k] + m.theta_c * fam.F_eps_prime(x[k]) - f[k];
  };

  ScalarField x = state.chi;
  ScalarField res(g);
  residual(x, res);
  double rn = norm(res, NormKind::L2);

  ChiStepInfo inf;
  std::ostringstream history;
  history << rn;
  while (rn > params.newton_tol) {
    if (inf.iterations >= params.max_newton)
      throw SolverError("chi_step: Newton did not converge, residual history: " + history.str());

    std::vector<double> fpp(g.count());
    for (int k = 0; k < g.count(); ++k) fpp[k] = fam.F_eps_second(x[k]);
    std::vector<double> diag(g.count());
    for (int i = 0; i < g.nodes[0]; ++i)
      for (int j = 0; j < g.nodes[1]; ++j) {
        double d = 1.0 / tau + m.theta_c * fpp[g.idx(i, j)];
        for (int a = 0; a < g.dim; ++a) {
          const double h = g.spacing(a);
          d += 2.0 * visc / (h * h);
        }
        diag[g.idx(i, j)] = d;
      }
    auto apply = [&](const ScalarField& v, ScalarField& out) {
      out = laplacian_neumann(v);
      for (int k = 0; k < g.count(); ++k)
        out[k] = v[k] / tau - visc * out[k] + m.theta_c * fpp[k] * v[k];
    };

    ScalarField delta(g, 0.0);
    ScalarField neg = res;
    neg *= -1.0;
    const double inner_tol = std::clamp(0.1 * params.newton_tol / rn, 1e-12, 1e-2);
    SolveReport rep = conjugate_gradient(g, apply, diag, neg, delta, inner_tol, 50 * g.count());
    inf.cg_iterations += rep.iterations;
    if (!rep.converged) throw SolverError("chi_step: inner CG failed");

    double step = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 40; ++bt) {
      ScalarField trial = x;
      trial.axpy(step, delta);
      ScalarField rt(g);
      residual(trial, rt);
      const double rtn = norm(rt, NormKind::L2);
      if (rtn <= (1.0 - 1e-4 * step) * rn || rtn <= params.newton_tol) {
        x = trial;
        res = rt;
        rn = rtn;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    ++inf.iterations;
    history << " " << rn;
    if (!accepted)
      throw SolverError("chi_step: line search stalled, residual history: " + history.str());
  }

  inf.residual = rn;
  if (info) *info = inf;
  return x;
}

ScalarField theta_step(const DiscreteState& state, const ScalarField& chi_np1,
                       const ScalarField& R_n, const SchemeParams& params, const EpsFamily& fam,
                       SolveReport* report) {
  const Grid& g = state.theta.grid;
  const double tau = params.tau, eps = fam.eps();

  ScalarField a(g), rhs(g);
  for (int k = 0; k < g.count(); ++k) {
    const double th = state.theta[k], ch = state.chi[k];
    const double an = fam.parabolic_coeff(th, ch);  // asserts the band
    const double dchi = (chi_np1[k] - ch) / tau;
    a[k] = an / tau;
    rhs[k] = an / tau * th + (th + eps) * fam.alpha(th, 1) * fam.G(ch, 1) * dchi + R_n[k] +
             dchi * dchi;
  }
  return solve_helmholtz(a, 1.0, rhs, params.linear_tol, report);
}

std::pair<ScalarField, VectorField> u_step(const DiscreteState& state, const ScalarField& chi_np1,
                                           const ScalarField& B_n, const BoundaryValues& b_n,
                                           const SchemeParams& params, const EpsFamily& fam,
                                           SolveReport* report) {
  const Grid& g = state.u.grid;
  const ModelFunctions& m = fam.model();
  const double tau = params.tau;

  ScalarField gam(g);
  for (int k = 0; k < g.count(); ++k) gam[k] = fam.gamma(chi_np1[k], 0);

  // (1/tau^2) u - kappa lap u = (2u_n - u_{n-1})/tau^2 + B + flux sources
  ScalarField rhs(g);
  for (int k = 0; k < g.count(); ++k)
    rhs[k] = (2.0 * state.u[k] - state.u_prev[k]) / (tau * tau) + B_n[k];
  rhs += edge_flux_source(gam, m.e);
  rhs += boundary_source(b_n);

  ScalarField u_np1 =
      solve_helmholtz(1.0 / (tau * tau), m.kappa, rhs, params.linear_tol, report);

  VectorField sigma = grad(u_np1);
  for (int a = 0; a < g.dim; ++a)
    for (int k = 0; k < g.count(); ++k)
      sigma.comp[a][k] = m.kappa * sigma.comp[a][k] - gam[k] * m.e[a];
  return {u_np1, sigma};
}

StepDiagnostics advance(DiscreteState& state, const StepInputs& inputs, const SchemeParams& params,
                        const EpsFamily& fam) {
  const Grid& g = state.theta.grid;
  const ModelFunctions& m = fam.model();
  const double tau = params.tau, eps = fam.eps();

  StepDiagnostics d;
  ChiStepInfo chi_info;
  ScalarField chi_np1 = chi_step(state, params, fam, &chi_info);
  d.newton_iterations = chi_info.iterations;
  d.newton_residual = chi_info.residual;
  d.cg_iterations = chi_info.cg_iterations;

  SolveReport theta_rep;
  ScalarField theta_np1 = theta_step(state, chi_np1, inputs.R, params, fam, &theta_rep);
  d.cg_iterations += theta_rep.iterations;

  SolveReport u_rep;
  auto [u_np1, sigma_np1] = u_step(state, chi_np1, inputs.B_omega, inputs.b_gamma, params, fam,
                                   &u_rep);
  d.cg_iterations += u_rep.iterations;

  // per-step monitors, evaluated before the state rolls over
  double cmin = HUGE_VAL, cmax = -HUGE_VAL, budget = 0.0, thmin = HUGE_VAL;
  for (int i = 0; i < g.nodes[0]; ++i)
    for (int j = 0; j < g.nodes[1]; ++j) {
      const int k = g.idx(i, j);
      const double an = fam.parabolic_coeff_unchecked(state.theta[k], state.chi[k]);
      cmin = std::min(cmin, an);
      cmax = std::max(cmax, an);
      const double dchi = (chi_np1[k] - state.chi[k]) / tau;
      const double dth = (theta_np1[k] - state.theta[k]) / tau;
      const double pump =
          (state.theta[k] + eps) * fam.alpha(state.theta[k], 1) * fam.G(state.chi[k], 1) * dchi;
      budget += g.weight(i, j) * (an * dth - pump - inputs.R[k] - dchi * dchi);
      thmin = std::min(thmin, theta_np1[k]);
      d.delta_chi_l2 += g.weight(i, j) * dchi * dchi;
      d.beta_chi_l2 += g.weight(i, j) * fam.beta(chi_np1[k]) * fam.beta(chi_np1[k]);
    }
  d.coeff_min = cmin;
  d.coeff_max = cmax;
  d.mass_budget_residual = std::abs(budget);
  d.theta_min = thmin;
  d.delta_chi_l2 = std::sqrt(d.delta_chi_l2);
  d.beta_chi_l2 = std::sqrt(d.beta_chi_l2);

  // sigma consistency: recompute kappa grad u - gamma_eps(chi) e
  VectorField check = grad(u_np1);
  double cinf = 0.0;
  for (int a = 0; a < g.dim; ++a)
    for (int k = 0; k < g.count(); ++k) {
      const double s = m.kappa * check.comp[a][k] - fam.gamma(chi_np1[k], 0) * m.e[a];
      cinf = std::max(cinf, std::abs(s - sigma_np1.comp[a][k]));
    }
  d.sigma_consistency = cinf;

  state.u_prev = std::move(state.u);
  state.u = std::move(u_np1);
  state.theta = std::move(theta_np1);
  state.chi = std::move(chi_np1);
  state.sigma = std::move(sigma_np1);
  state.n += 1;
  d.n = state.n;
  return d;
}

Trajectory run_scheme(const PreparedData& prepared, const DiscreteForcing& forcing,
                      const SchemeParams& params, const EpsFamily& fam, bool store_full) {
  Trajectory traj;
  traj.grid = prepared.theta0_eps.grid;
  traj.model = fam.model();
  traj.params = params;
  traj.R = forcing.R;
  traj.B_omega = forcing.B_omega;
  traj.b_gamma = forcing.b_gamma;

  DiscreteState state = init_state(prepared, params);
  traj.u_minus1 = state.u_prev;
  if (store_full) traj.levels.reserve(params.N + 1);
  traj.levels.push_back({state.theta, state.u, state.chi, state.sigma});

  for (int n = 0; n < params.N; ++n) {
    StepInputs in{forcing.R[n], forcing.B_omega[n], forcing.b_gamma[n]};
    try {
      traj.steps.push_back(advance(state, in, params, fam));
    } catch (const std::exception& e) {
      traj.error = e.what();
      traj.complete = false;
      return traj;  // partial trajectory plus error report
    }
    if (store_full) {
      traj.levels.push_back({state.theta, state.u, state.chi, state.sigma});
    } else if (n == params.N - 1) {
      traj.levels.push_back({state.theta, state.u, state.chi, state.sigma});
    }
  }
  traj.complete = true;
  return traj;
}

}  // namespace tmpf
