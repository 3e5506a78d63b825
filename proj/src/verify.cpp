#include <cmath>
#include <random>
#include <sstream>

#include "tmpf/experiments.hpp"

namespace tmpf {

namespace {

// Adaptive Simpson quadrature (the independent oracle for kernel masses).
double simpson(double fa, double fm, double fb, double a, double b) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <class F>
double adaptive_simpson(F&& f, double a, double b, double tol, int depth = 0) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = simpson(fa, fm, fb, a, b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(fa, flm, fm, a, m);
  const double right = simpson(fm, frm, fb, m, b);
  if (depth > 40 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, m, 0.5 * tol, depth + 1) +
         adaptive_simpson(f, m, b, 0.5 * tol, depth + 1);
}

struct Check {
  bool ok = true;
  std::ostringstream detail;
  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << (detail.str().empty() ? "" : "; ") << what;
    }
  }
};

SuiteResult regularization_suite(const VerifyOptions& opts) {
  Check c;
  ModelFunctions m = ModelFunctions::preset("default");

  // lambda_eps(1) = 2 exactly up to roundoff
  c.expect(std::abs(lambda_eps(1.0) - 2.0) <= 1e-12, "lambda_eps(1) != 2");

  for (double eps : {0.2, 0.1, 0.05}) {
    EpsFamily fam(m, eps);
    // exact zeros
    c.expect(fam.alpha(0.0, 0) == 0.0 && fam.alpha(0.0, 1) == 0.0 && fam.alpha(0.0, 2) == 0.0,
             "alpha_eps zeros at 0 not exact");
    // alpha_eps' = alpha' beyond 2 sqrt(eps), exactly
    for (double r : {2.0 * std::sqrt(eps), 1.0, 2.5, 7.0}) {
      if (r < 2.0 * std::sqrt(eps)) continue;
      c.expect(fam.alpha(r, 1) == m.alpha.eval(r, 1), "alpha_eps' != alpha' beyond 2 sqrt(eps)");
    }
    // sup |alpha_eps - alpha| <= 2 sqrt(eps) (|a1| + |a2|), sampled
    const double bound = 2.0 * std::sqrt(eps) * (std::abs(m.a1()) + std::abs(m.a2()));
    double sup = 0.0;
    for (int i = 0; i <= 10000; ++i) {
      const double r = 4.0 * i / 10000.0;
      sup = std::max(sup, std::abs(fam.alpha(r, 0) - m.alpha.eval(r, 0)));
    }
    c.expect(sup <= bound + 1e-14, "sup|alpha_eps - alpha| exceeds 2 sqrt(eps)(|a1|+|a2|)");

    // kernel mass: quadrature oracle vs closed-form antiderivative vs 1
    const double scale = opts.lambda_scale;
    auto D_scaled = [&](double r) { return scale * fam.D(r); };
    const double mass =
        adaptive_simpson(D_scaled, 0.0, eps, 1e-12) +
        adaptive_simpson(D_scaled, eps, std::sqrt(eps), 1e-12) +
        adaptive_simpson(D_scaled, std::sqrt(eps), 2.0 * std::sqrt(eps), 1e-12);
    c.expect(std::abs(mass - 1.0) <= 1e-8, "int D_eps != 1 (quadrature oracle)");
    c.expect(std::abs(fam.D1(2.0 * std::sqrt(eps)) - 1.0) <= 1e-12,
             "closed-form antiderivative D1(2 sqrt(eps)) != 1");
    c.expect(std::abs(mass - scale * fam.D1(2.0 * std::sqrt(eps))) <= 1e-8,
             "quadrature vs closed form mismatch for D_eps");
  }

  // zeta profile
  c.expect(EpsFamily::zeta_base(0.0) == 1.0, "zeta(0) != 1");
  double zmax = 0.0;
  for (int i = 0; i <= 10000; ++i) zmax = std::max(zmax, std::abs(EpsFamily::zeta_base(i / 10000.0)));
  c.expect(zmax <= 1.0 + 1e-15, "|zeta| > 1");
  const double zmass = adaptive_simpson([](double u) { return EpsFamily::zeta_base(u); }, 0.0, 1.0,
                                        1e-14);
  c.expect(std::abs(zmass) <= 1e-12, "int_0^1 zeta != 0");

  return {"regularization-certificates", c.ok, c.detail.str()};
}

// Two-stage brute-force minimization of the Moreau objective over a grid.
std::pair<double, double> moreau_brute(const ModelFunctions& m, double eps, double s) {
  auto objective = [&](double p) {
    const double f1 = m.F1.value(p);
    if (!std::isfinite(f1)) return HUGE_VAL;
    return (p - s) * (p - s) / (2.0 * eps) + f1;
  };
  double lo = -3.0, hi = 3.0;
  double best_p = lo, best = HUGE_VAL;
  for (int stage = 0; stage < 2; ++stage) {
    const int n = stage == 0 ? 60000 : 40000;
    for (int i = 0; i <= n; ++i) {
      const double p = lo + (hi - lo) * i / n;
      const double v = objective(p);
      if (v < best) {
        best = v;
        best_p = p;
      }
    }
    const double span = (hi - lo) / n;
    lo = best_p - 2.0 * span;
    hi = best_p + 2.0 * span;
  }
  return {best, (s - best_p) / eps};
}

SuiteResult moreau_suite(std::uint64_t seed) {
  Check c;
  ModelFunctions m = ModelFunctions::preset("default");
  for (double eps : {0.5, 0.1, 0.02}) {
    EpsFamily fam(m, eps);
    double worst_f = 0.0, worst_b = 0.0;
    for (int i = 0; i < 100; ++i) {
      const double s = -3.0 + 6.0 * i / 99.0;
      const auto [fv, bv] = fam.yosida(s);
      const auto [fo, bo] = moreau_brute(m, eps, s);
      worst_f = std::max(worst_f, std::abs(fv - fo));
      worst_b = std::max(worst_b, std::abs(bv - bo));
    }
    c.expect(worst_f <= 1e-6, "F1_eps vs brute force exceeds 1e-6");
    c.expect(worst_b <= 1e-6, "beta_eps vs brute force exceeds 1e-6");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-4.0, 4.0);
    for (int i = 0; i < 10000; ++i) {
      const double s = dist(rng), t = dist(rng);
      const double bs = fam.beta(s), bt = fam.beta(t);
      c.expect((bs - bt) * (s - t) >= 0.0, "beta_eps monotonicity fails");
      c.expect(std::abs(bs - bt) <= std::abs(s - t) / eps + 1e-12, "beta_eps Lipschitz fails");
      if (!c.ok) break;
    }
  }
  return {"moreau-oracle", c.ok, c.detail.str()};
}

SuiteResult interpolant_suite(std::uint64_t seed) {
  Check c;
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  std::uniform_int_distribution<int> nd(2, 10);
  for (int trial = 0; trial < 100; ++trial) {
    const int N = nd(rng);
    std::vector<double> z(N + 1);
    for (double& v : z) v = dist(rng);
    const double tau = 0.25 + 0.5 * std::abs(dist(rng));
    const InterpIdentityReport rep = interp_identity_suite(z, tau);
    c.expect(rep.max_equality_residual <= 1e-12, "interpolant equality residual > 1e-12");
    c.expect(rep.tilde_minus_hat_ok, "tilde-hat Linf bound fails");
    c.expect(rep.knot_derivative_max_err <= 1e-10, "knot derivative identity fails");
    if (!c.ok) break;
  }
  const InterpIdentityReport rep = interp_identity_suite({0.0, 1.0, 2.0}, 1.0);
  c.expect(std::abs(rep.forth_minus_hat_l2_sq - 2.0 / 3.0) <= 1e-14 &&
               std::abs(rep.forth_minus_hat_alg - 2.0 / 3.0) <= 1e-14,
           "scalar example (0,1,2) != 2/3");
  return {"interpolant-algebra", c.ok, c.detail.str()};
}

SuiteResult constant_reduction_suite() {
  Check c;
  const Grid g = Grid::line(1.0, 33);

  // chi-step closed form: chi1 = c/(1 - tau theta_c) for the decoupled quadratic model
  {
    ModelFunctions m = ModelFunctions::preset("decoupled");
    m.F1.kind = F1Spec::Kind::Zero;
    EpsFamily fam(m, 0.1);
    SchemeParams p = SchemeParams::make(1.98, 4, 0.1, m, 1e-12, 1e-13);
    const double tau = p.tau;  // 0.495 < tau* = 1
    DiscreteState st;
    st.n = 0;
    st.theta = ScalarField(g, 1.0);
    st.u = ScalarField(g, 0.0);
    st.u_prev = ScalarField(g, 0.0);
    st.chi = ScalarField(g, 0.3);
    st.sigma = VectorField(g);
    const ScalarField chi1 = chi_step(st, p, fam);
    const double expected = 0.3 / (1.0 - tau * m.theta_c);
    double worst = 0.0;
    for (double v : chi1.v) worst = std::max(worst, std::abs(v - expected));
    c.expect(worst <= 1e-10, "constant-mode chi-step closed form fails");
  }

  // theta-step constant-mode heating: theta1 = theta0 + tau r0 / c0
  {
    ModelFunctions m = ModelFunctions::preset("decoupled");
    EpsFamily fam(m, 0.1);
    SchemeParams p = SchemeParams::make(1.0, 10, 0.1, m, 1e-12, 1e-13);
    DiscreteState st;
    st.theta = ScalarField(g, 2.0);
    st.u = ScalarField(g, 0.0);
    st.u_prev = ScalarField(g, 0.0);
    st.chi = ScalarField(g, 0.2);
    st.sigma = VectorField(g);
    const ScalarField th1 = theta_step(st, st.chi, ScalarField(g, 0.7), p, fam);
    const double expected = 2.0 + p.tau * 0.7 / m.c0;
    double worst = 0.0;
    for (double v : th1.v) worst = std::max(worst, std::abs(v - expected));
    c.expect(worst <= 1e-10, "constant-mode theta-step update fails");
  }

  // u-step constant mode: u_{n+1} = 2 u_n - u_{n-1} + tau^2 b
  {
    ModelFunctions m = ModelFunctions::preset("decoupled");
    EpsFamily fam(m, 0.1);
    SchemeParams p = SchemeParams::make(1.0, 10, 0.1, m, 1e-12, 1e-13);
    DiscreteState st;
    st.theta = ScalarField(g, 1.0);
    st.u = ScalarField(g, 0.4);
    st.u_prev = ScalarField(g, 0.1);
    st.chi = ScalarField(g, 0.0);
    st.sigma = VectorField(g);
    const auto [u1, s1] = u_step(st, st.chi, ScalarField(g, 3.0),
                                 BoundaryValues::constant(g, 0.0), p, fam);
    const double expected = 2.0 * 0.4 - 0.1 + p.tau * p.tau * 3.0;
    double worst = 0.0;
    for (double v : u1.v) worst = std::max(worst, std::abs(v - expected));
    c.expect(worst <= 1e-10, "constant-mode u-step update fails");
  }

  return {"constant-data-reductions", c.ok, c.detail.str()};
}

SuiteResult wave_energy_suite() {
  Check c;
  ExperimentConfig cfg = ExperimentConfig::preset("decoupled-wave");
  cfg.N = 100;
  RunResult r = run_experiment(cfg);
  c.expect(r.traj.complete, "decoupled wave run failed");
  c.expect(r.report.energy.max_residual_rel <= 1e-10, "energy identity residual > 1e-10");
  c.expect(r.report.energy.nonincreasing, "mechanical energy not nonincreasing");
  return {"energy-audit-decoupled-wave", c.ok, c.detail.str()};
}

SuiteResult manufactured_suite() {
  Check c;
  constexpr double kPi = 3.14159265358979323846;
  std::vector<double> errs;
  for (int n : {33, 65, 129, 257}) {
    const Grid g = Grid::line(1.0, n);
    ScalarField rhs(g), exact(g);
    for (int i = 0; i < n; ++i) {
      const double x = g.coord(0, i);
      exact[i] = std::cos(kPi * x);
      rhs[i] = (1.0 + kPi * kPi) * std::cos(kPi * x);
    }
    const ScalarField sol = solve_helmholtz(1.0, 1.0, rhs, 1e-11);
    double err = 0.0;
    for (int i = 0; i < n; ++i) err = std::max(err, std::abs(sol[i] - exact[i]));
    errs.push_back(err);
  }
  for (size_t i = 0; i + 1 < errs.size(); ++i) {
    const double order = std::log2(errs[i] / errs[i + 1]);
    c.expect(order >= 1.9 && order <= 2.1, "observed order outside [1.9, 2.1]");
  }
  return {"manufactured-solution-orders", c.ok, c.detail.str()};
}

}  // namespace

VerifyReport verify_suite(std::uint64_t seed, const VerifyOptions& opts) {
  VerifyReport rep;
  rep.suites.push_back(regularization_suite(opts));
  rep.suites.push_back(moreau_suite(seed));
  rep.suites.push_back(interpolant_suite(seed));
  rep.suites.push_back(constant_reduction_suite());
  rep.suites.push_back(wave_energy_suite());
  rep.suites.push_back(manufactured_suite());
  rep.all_passed = true;
  for (const SuiteResult& s : rep.suites) rep.all_passed = rep.all_passed && s.passed;
  return rep;
}

}  // namespace tmpf
