#include <doctest.h>

#include <chrono>
#include <cmath>

#include "oracles.hpp"
#include "tmpf/experiments.hpp"
#include "tmpf/stepper.hpp"

using namespace tmpf;

namespace {
constexpr double kPi = 3.14159265358979323846;

PreparedData constant_prepared(const Grid& g, double theta, double u, double chi,
                               const EpsFamily& fam) {
  PreparedData p;
  p.theta0_eps = ScalarField(g, theta);
  p.chi0_eps = ScalarField(g, chi);
  p.u0_eps = ScalarField(g, u);
  p.u0_prime_eps = ScalarField(g, 0.0);
  p.sigma0_eps = VectorField(g);
  for (int k = 0; k < g.count(); ++k)
    p.sigma0_eps.comp[0][k] = -fam.gamma(chi, 0) * fam.model().e[0];
  p.w0_eps = fam.w_of(p.theta0_eps, p.chi0_eps);
  return p;
}

DiscreteForcing zero_forcing(const Grid& g, int N) {
  DiscreteForcing f;
  for (int n = 0; n < N; ++n) {
    f.R.emplace_back(g, 0.0);
    f.B_omega.emplace_back(g, 0.0);
    f.b_gamma.push_back(BoundaryValues::constant(g, 0.0));
  }
  return f;
}
}  // namespace

TEST_CASE("tau* gate: construction refused at and beyond the threshold") {
  ModelFunctions m = ModelFunctions::preset("default");  // tau* = 1/(1*1) = 1
  CHECK_THROWS_AS(SchemeParams::make(2.0, 2, 0.1, m), std::invalid_argument);   // tau = 1 = tau*
  CHECK_THROWS_AS(SchemeParams::make(3.0, 2, 0.1, m), std::invalid_argument);   // tau > 1
  CHECK_THROWS_AS(SchemeParams::make(1.0, 1, 0.1, m), std::invalid_argument);   // N < 2
  const SchemeParams ok = SchemeParams::make(1.0, 2, 0.1, m);
  CHECK(ok.tau == doctest::Approx(0.5));

  ModelFunctions mz = m;
  mz.F2.kind = F2Spec::Kind::Zero;
  mz.F2.sup_pi_prime = 0.0;  // tau* = +inf
  CHECK(std::isinf(mz.tau_star()));
  SchemeParams::make(2.0, 2, 0.1, mz);  // tau = 1 allowed (tau <= 1 still enforced)
}

TEST_CASE("init_state: u_{-1} and the sigma level") {
  const Grid g = Grid::line(1.0, 17);
  ModelFunctions m = ModelFunctions::preset("default");
  EpsFamily fam(m, 0.1);
  SchemeParams p = SchemeParams::make(1.0, 10, 0.1, m);

  PreparedData prep = constant_prepared(g, 1.0, 0.5, 0.3, fam);
  prep.u0_prime_eps = ScalarField(g, 2.0);
  const DiscreteState s = init_state(prep, p);
  CHECK(s.n == 0);
  for (double v : s.u_prev.v) CHECK(v == doctest::Approx(0.5 - p.tau * 2.0).epsilon(1e-14));
  // delta_tau u_{-1} = u0'
  for (int k = 0; k < g.count(); ++k)
    CHECK((s.u[k] - s.u_prev[k]) / p.tau == doctest::Approx(2.0).epsilon(1e-12));

  // u0' = 0 gives u_{-1} = u0
  prep.u0_prime_eps = ScalarField(g, 0.0);
  const DiscreteState s2 = init_state(prep, p);
  for (int k = 0; k < g.count(); ++k) CHECK(s2.u_prev[k] == s2.u[k]);
}

TEST_CASE("chi_step: constant-mode closed form chi1 = c/(1 - tau theta_c)") {
  const Grid g = Grid::line(1.0, 33);
  ModelFunctions m = ModelFunctions::preset("decoupled");
  m.F1.kind = F1Spec::Kind::Zero;
  EpsFamily fam(m, 0.1);

  for (double tau_frac : {0.5, 0.99}) {
    const double tau = tau_frac * m.tau_star();
    SchemeParams p = SchemeParams::make(2.0 * tau, 2, 0.1, m, 1e-12, 1e-14);
    DiscreteState s;
    s.theta = ScalarField(g, 1.0);
    s.u = ScalarField(g, 0.0);
    s.u_prev = ScalarField(g, 0.0);
    s.chi = ScalarField(g, 0.3);
    s.sigma = VectorField(g);
    const ScalarField chi1 = chi_step(s, p, fam);
    const double expected = 0.3 / (1.0 - p.tau * m.theta_c);
    for (double v : chi1.v) CHECK(v == doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("chi_step: zero is stationary and the gate is checked") {
  const Grid g = Grid::line(1.0, 17);
  ModelFunctions m = ModelFunctions::preset("decoupled");
  EpsFamily fam(m, 0.1);
  SchemeParams p = SchemeParams::make(1.0, 10, 0.1, m, 1e-12);
  DiscreteState s;
  s.theta = ScalarField(g, 1.0);
  s.u = ScalarField(g, 0.0);
  s.u_prev = ScalarField(g, 0.0);
  s.chi = ScalarField(g, 0.0);
  s.sigma = VectorField(g);
  const ScalarField chi1 = chi_step(s, p, fam);
  for (double v : chi1.v) CHECK(std::abs(v) <= 1e-12);

  SchemeParams bad = p;
  bad.tau = 1.5;  // forced past the gate
  CHECK_THROWS_AS(chi_step(s, bad, fam), std::invalid_argument);
}

TEST_CASE("chi_step: indicator run keeps beta_eps finite and meets the residual") {
  const Grid g = Grid::line(1.0, 65);
  ModelFunctions m = ModelFunctions::preset("default");
  EpsFamily fam(m, 0.1);
  SchemeParams p = SchemeParams::make(1.0, 200, 0.1, m, 1e-11);
  DiscreteState s;
  s.theta = ScalarField(g, 1.0);
  s.u = ScalarField(g, 0.0);
  s.u_prev = ScalarField(g, 0.0);
  s.chi = ScalarField(g);
  for (int i = 0; i < g.count(); ++i) s.chi[i] = 0.98 * std::cos(kPi * g.coord(0, i));
  s.sigma = VectorField(g);
  for (int k = 0; k < g.count(); ++k) s.sigma.comp[0][k] = 2.0;  // push against the obstacle

  ChiStepInfo info;
  const ScalarField chi1 = chi_step(s, p, fam, &info);
  CHECK(info.residual <= 1e-11);
  double bnorm = 0.0;
  for (int k = 0; k < g.count(); ++k) bnorm += g.weight(k) * fam.beta(chi1[k]) * fam.beta(chi1[k]);
  CHECK(std::isfinite(std::sqrt(bnorm)));
}

TEST_CASE("chi_step Hessian is positive definite at tau = 0.99 tau*") {
  const Grid g = Grid::line(1.0, 33);
  ModelFunctions m = ModelFunctions::preset("default");
  EpsFamily fam(m, 0.1);
  const double tau = 0.99 * m.tau_star();
  auto rng = oracles::rng(21);
  std::uniform_real_distribution<double> dist(-1.5, 1.5);
  for (int trial = 0; trial < 25; ++trial) {
    ScalarField chi(g), v(g);
    for (int k = 0; k < g.count(); ++k) {
      chi[k] = dist(rng);
      v[k] = dist(rng);
    }
    // H v = v/tau - (1 + eps/tau) lap v + theta_c F_eps''(chi) v
    ScalarField Hv = laplacian_neumann(v);
    for (int k = 0; k < g.count(); ++k)
      Hv[k] = v[k] / tau - (1.0 + fam.eps() / tau) * Hv[k] +
              m.theta_c * fam.F_eps_second(chi[k]) * v[k];
    const double rayleigh = inner(Hv, v) / inner(v, v);
    CHECK(rayleigh > 0.0);
  }
}

TEST_CASE("theta_step: heat fixed point and constant-mode heating") {
  const Grid g = Grid::line(1.0, 33);
  ModelFunctions m = ModelFunctions::preset("decoupled");
  EpsFamily fam(m, 0.1);
  SchemeParams p = SchemeParams::make(1.0, 10, 0.1, m, 1e-12, 1e-13);
  DiscreteState s;
  s.theta = ScalarField(g, 2.5);
  s.u = ScalarField(g, 0.0);
  s.u_prev = ScalarField(g, 0.0);
  s.chi = ScalarField(g, 0.1);
  s.sigma = VectorField(g);

  // R = 0, delta chi = 0: theta unchanged
  const ScalarField th_same = theta_step(s, s.chi, ScalarField(g, 0.0), p, fam);
  for (double v : th_same.v) CHECK(v == doctest::Approx(2.5).epsilon(1e-12));

  // constant R = r0: theta + tau r0 / c0
  const ScalarField th_heat = theta_step(s, s.chi, ScalarField(g, 0.6), p, fam);
  for (double v : th_heat.v)
    CHECK(v == doctest::Approx(2.5 + p.tau * 0.6 / m.c0).epsilon(1e-12));

  // mass budget with G == 0: c0 int theta_{n+1} = c0 int theta_n + tau int (R + |dchi|^2)
  ScalarField chi1 = s.chi;
  for (int k = 0; k < g.count(); ++k) chi1[k] += 0.05 * std::sin(2.0 * kPi * g.coord(0, k));
  const ScalarField R(g, 0.3);
  const ScalarField th1 = theta_step(s, chi1, R, p, fam);
  double lhs = m.c0 * integral(th1);
  double rhs = m.c0 * integral(s.theta);
  for (int k = 0; k < g.count(); ++k) {
    const double dchi = (chi1[k] - s.chi[k]) / p.tau;
    rhs += p.tau * g.weight(k) * (R[k] + dchi * dchi);
  }
  CHECK(std::abs(lhs - rhs) <= 1e-10);
}

TEST_CASE("u_step: constant data, second-difference update, standing-wave decay") {
  const Grid g = Grid::line(1.0, 65);
  ModelFunctions m = ModelFunctions::preset("decoupled");
  EpsFamily fam(m, 0.1);
  SchemeParams p = SchemeParams::make(1.0, 400, 0.1, m, 1e-12, 1e-13);

  // B = 0, G = 0, u0 constant: u stays, sigma stays 0
  {
    DiscreteState s;
    s.theta = ScalarField(g, 1.0);
    s.u = ScalarField(g, 0.7);
    s.u_prev = ScalarField(g, 0.7);
    s.chi = ScalarField(g, 0.0);
    s.sigma = VectorField(g);
    for (int n = 0; n < 3; ++n) {
      const auto [u1, s1] = u_step(s, s.chi, ScalarField(g, 0.0),
                                   BoundaryValues::constant(g, 0.0), p, fam);
      for (double v : u1.v) CHECK(v == doctest::Approx(0.7).epsilon(1e-12));
      for (double v : s1.comp[0]) CHECK(std::abs(v) <= 1e-10);
      s.u_prev = s.u;
      s.u = u1;
      s.sigma = s1;
    }
  }

  // constant mode with interior load b: u_{n+1} = 2 u_n - u_{n-1} + tau^2 b
  {
    DiscreteState s;
    s.theta = ScalarField(g, 1.0);
    s.u = ScalarField(g, 0.2);
    s.u_prev = ScalarField(g, -0.1);
    s.chi = ScalarField(g, 0.0);
    s.sigma = VectorField(g);
    const auto [u1, s1] = u_step(s, s.chi, ScalarField(g, 1.3),
                                 BoundaryValues::constant(g, 0.0), p, fam);
    const double expected = 2.0 * 0.2 + 0.1 + p.tau * p.tau * 1.3;
    for (double v : u1.v) CHECK(v == doctest::Approx(expected).epsilon(1e-12));
  }

  // standing wave: discrete mechanical energy nonincreasing
  {
    PreparedData prep;
    prep.theta0_eps = ScalarField(g, 1.0);
    prep.chi0_eps = ScalarField(g, 0.0);
    prep.u0_eps = ScalarField(g);
    for (int i = 0; i < g.count(); ++i) prep.u0_eps[i] = std::cos(kPi * g.coord(0, i));
    prep.u0_prime_eps = ScalarField(g, 0.0);
    prep.sigma0_eps = VectorField(g);
    for (int k = 0; k < g.count(); ++k) prep.sigma0_eps.comp[0][k] = 0.0;
    prep.sigma0_eps = grad(prep.u0_eps);
    prep.w0_eps = fam.w_of(prep.theta0_eps, prep.chi0_eps);

    DiscreteState s = init_state(prep, p);
    const auto meas = edge_measures(g, 0);
    auto energy = [&](const DiscreteState& st, const ScalarField& u_new) {
      double kin = 0.0;
      for (int k = 0; k < g.count(); ++k) {
        const double d = (u_new[k] - st.u[k]) / p.tau;
        kin += g.weight(k) * d * d;
      }
      return 0.5 * m.kappa * kin;
    };
    double prev_energy = HUGE_VAL;
    for (int n = 0; n < 50; ++n) {
      const auto [u1, s1] = u_step(s, s.chi, ScalarField(g, 0.0),
                                   BoundaryValues::constant(g, 0.0), p, fam);
      double e = energy(s, u1);
      const auto du = edge_diffs(u1, 0);
      for (size_t k = 0; k < meas.size(); ++k)
        e += 0.5 * meas[k] * m.kappa * m.kappa * du[k] * du[k];
      CHECK(e <= prev_energy + 1e-12);
      prev_energy = e;
      s.u_prev = s.u;
      s.u = u1;
      s.sigma = s1;
    }
  }
}

TEST_CASE("advance: decoupled zero data leaves the state fixed") {
  const Grid g = Grid::line(1.0, 17);
  ModelFunctions m = ModelFunctions::preset("decoupled");
  m.F1.kind = F1Spec::Kind::Zero;
  m.F2.kind = F2Spec::Kind::Zero;
  m.F2.sup_pi_prime = 0.0;
  EpsFamily fam(m, 0.1);
  SchemeParams p = SchemeParams::make(1.0, 10, 0.1, m, 1e-12, 1e-13);
  PreparedData prep = constant_prepared(g, 0.0, 0.0, 0.0, fam);
  DiscreteState s = init_state(prep, p);
  StepInputs in{ScalarField(g, 0.0), ScalarField(g, 0.0), BoundaryValues::constant(g, 0.0)};
  const StepDiagnostics d = advance(s, in, p, fam);
  CHECK(s.n == 1);
  CHECK(d.n == 1);
  for (double v : s.theta.v) CHECK(std::abs(v) <= 1e-11);
  for (double v : s.chi.v) CHECK(std::abs(v) <= 1e-11);
  for (double v : s.u.v) CHECK(std::abs(v) <= 1e-11);
}

TEST_CASE("advance: sigma consistency and determinism") {
  const Grid g = Grid::line(1.0, 33);
  ModelFunctions m = ModelFunctions::preset("default");
  EpsFamily fam(m, 0.1);
  SchemeParams p = SchemeParams::make(1.0, 100, 0.1, m);

  PreparedData prep;
  prep.theta0_eps = ScalarField(g);
  prep.chi0_eps = ScalarField(g);
  for (int i = 0; i < g.count(); ++i) {
    prep.theta0_eps[i] = 1.0 + 0.2 * std::cos(kPi * g.coord(0, i));
    prep.chi0_eps[i] = 0.5 * std::cos(kPi * g.coord(0, i));
  }
  prep.u0_eps = ScalarField(g, 0.0);
  prep.u0_prime_eps = ScalarField(g, 0.0);
  prep.sigma0_eps = grad(prep.u0_eps);
  for (int k = 0; k < g.count(); ++k)
    prep.sigma0_eps.comp[0][k] =
        m.kappa * prep.sigma0_eps.comp[0][k] - fam.gamma(prep.chi0_eps[k], 0) * m.e[0];
  prep.w0_eps = fam.w_of(prep.theta0_eps, prep.chi0_eps);

  StepInputs in{ScalarField(g, 0.1), ScalarField(g, 0.0), BoundaryValues::constant(g, 0.0)};

  DiscreteState a = init_state(prep, p);
  DiscreteState b = init_state(prep, p);
  for (int n = 0; n < 5; ++n) {
    const StepDiagnostics da = advance(a, in, p, fam);
    const StepDiagnostics db = advance(b, in, p, fam);
    CHECK(da.sigma_consistency <= 1e-10);
    CHECK(db.sigma_consistency == da.sigma_consistency);
    CHECK(da.coeff_min >= fam.lambda_star());
    CHECK(da.coeff_max <= fam.C_star());
    // bit-identical evolution
    for (int k = 0; k < g.count(); ++k) {
      REQUIRE(a.theta[k] == b.theta[k]);
      REQUIRE(a.chi[k] == b.chi[k]);
      REQUIRE(a.u[k] == b.u[k]);
      REQUIRE(a.sigma.comp[0][k] == b.sigma.comp[0][k]);
    }
  }
}

TEST_CASE("run_scheme: minimum run, trajectory length, rolling storage") {
  const Grid g = Grid::line(1.0, 17);
  ModelFunctions m = ModelFunctions::preset("default");
  EpsFamily fam(m, 0.1);
  SchemeParams p = SchemeParams::make(0.5, 2, 0.1, m);
  PreparedData prep = constant_prepared(g, 1.0, 0.0, 0.2, fam);

  const Trajectory t2 = run_scheme(prep, zero_forcing(g, 2), p, fam);
  CHECK(t2.complete);
  CHECK(t2.levels.size() == 3);  // N + 1 levels

  SchemeParams p10 = SchemeParams::make(0.5, 10, 0.1, m);
  const Trajectory thin = run_scheme(prep, zero_forcing(g, 10), p10, fam, /*store_full=*/false);
  CHECK(thin.complete);
  CHECK(thin.levels.size() == 2);  // first and last only
  CHECK(thin.steps.size() == 10);
}

TEST_CASE("run_scheme: substep failure yields a partial trajectory with a report") {
  const Grid g = Grid::line(1.0, 17);
  ModelFunctions m = ModelFunctions::preset("default");
  EpsFamily fam(m, 0.1);
  SchemeParams p = SchemeParams::make(1.0, 4, 0.1, m);
  p.max_newton = 0;  // force a chi-step failure
  PreparedData prep = constant_prepared(g, 1.0, 0.0, 0.2, fam);
  const Trajectory t = run_scheme(prep, zero_forcing(g, 4), p, fam);
  CHECK_FALSE(t.complete);
  CHECK_FALSE(t.error.empty());
  CHECK(t.levels.size() >= 1);
}

TEST_CASE("run_scheme: default-config-sized run completes quickly") {
  const Grid g = Grid::line(1.0, 65);
  ModelFunctions m = ModelFunctions::preset("default");
  EpsFamily fam(m, 0.1);
  SchemeParams p = SchemeParams::make(1.0, 200, 0.1, m);

  PreparedData prep;
  prep.theta0_eps = ScalarField(g);
  prep.chi0_eps = ScalarField(g);
  for (int i = 0; i < g.count(); ++i) {
    prep.theta0_eps[i] = 1.0 + 0.2 * std::cos(kPi * g.coord(0, i));
    prep.chi0_eps[i] = 0.5 * std::cos(kPi * g.coord(0, i));
  }
  prep.u0_eps = ScalarField(g, 0.0);
  prep.u0_prime_eps = ScalarField(g, 0.0);
  prep.sigma0_eps = VectorField(g);
  for (int k = 0; k < g.count(); ++k)
    prep.sigma0_eps.comp[0][k] = -fam.gamma(prep.chi0_eps[k], 0) * m.e[0];
  prep.w0_eps = fam.w_of(prep.theta0_eps, prep.chi0_eps);

  DiscreteForcing f;
  for (int n = 0; n < 200; ++n) {
    f.R.emplace_back(g, 0.1);
    f.B_omega.emplace_back(g, 0.0);
    f.b_gamma.push_back(BoundaryValues::constant(g, 0.0));
  }
  const auto t0 = std::chrono::steady_clock::now();
  const Trajectory t = run_scheme(prep, f, p, fam);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(t.complete);
  CHECK(t.levels.size() == 201);
  CHECK(secs < 10.0);
  // constant-data reductions hold at every step, not just the first:
  // theta stays spatially smooth and sigma consistency holds throughout
  for (const StepDiagnostics& d : t.steps) CHECK(d.sigma_consistency <= 1e-10);
}

TEST_CASE("2D coupled run: identities and consistency carry over") {
  ExperimentConfig cfg = ExperimentConfig::defaults();
  cfg.grid = Grid::rect(1.0, 1.0, 33, 33);
  cfg.model.e = {0.6, 0.8};
  cfg.N = 30;
  RunResult r = run_experiment(cfg);
  REQUIRE(r.traj.complete);
  CHECK(r.summary.max_budget_residual <= 1e-9);
  CHECK(r.summary.max_energy_residual_rel <= 1e-9);
  CHECK(r.summary.max_sigma_consistency <= 1e-10);
  CHECK(r.report.ledger.field_interp_residual <= 1e-12);
  CHECK(r.report.entropy.min_theta >= 0.0);
}

TEST_CASE("constant-data reductions hold at every step of a full run") {
  const Grid g = Grid::line(1.0, 17);
  ModelFunctions m = ModelFunctions::preset("decoupled");
  EpsFamily fam(m, 0.1);
  SchemeParams p = SchemeParams::make(1.0, 10, 0.1, m, 1e-12, 1e-13);
  PreparedData prep;
  prep.theta0_eps = ScalarField(g, 0.8);
  prep.chi0_eps = ScalarField(g, 0.0);
  prep.u0_eps = ScalarField(g, 0.25);
  prep.u0_prime_eps = ScalarField(g, 0.0);
  prep.sigma0_eps = VectorField(g);
  prep.w0_eps = fam.w_of(prep.theta0_eps, prep.chi0_eps);
  DiscreteForcing f;
  for (int n = 0; n < 10; ++n) {
    f.R.emplace_back(g, 0.4);
    f.B_omega.emplace_back(g, 0.0);
    f.b_gamma.push_back(BoundaryValues::constant(g, 0.0));
  }
  const Trajectory t = run_scheme(prep, f, p, fam);
  REQUIRE(t.complete);
  for (int n = 0; n <= 10; ++n) {
    const double expected_theta = 0.8 + n * p.tau * 0.4 / m.c0;
    for (double v : t.levels[n].theta.v)
      REQUIRE(v == doctest::Approx(expected_theta).epsilon(1e-11));
    for (double v : t.levels[n].u.v) REQUIRE(v == doctest::Approx(0.25).epsilon(1e-11));
    for (double v : t.levels[n].chi.v) REQUIRE(std::abs(v) <= 1e-10);
  }
}
