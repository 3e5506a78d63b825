#include "tmpf/interpolant.hpp"

#include <algorithm>

namespace tmpf {

namespace {

// 3-point Gauss on [a, b]; exact for polynomials of degree <= 5.
template <class F>
double gauss3(F&& f, double a, double b) {
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  const double x = 0.774596669241483377036;
  return half * (5.0 * f(mid - half * x) + 8.0 * f(mid) + 5.0 * f(mid + half * x)) / 9.0;
}

double rel_residual(double lhs, double rhs) {
  const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
  return std::abs(lhs - rhs) / scale;
}

}  // namespace

InterpIdentityReport interp_identity_suite(const std::vector<double>& levels, double tau) {
  const int N = static_cast<int>(levels.size()) - 1;
  if (N < 2) throw std::invalid_argument("interp_identity_suite: need N >= 2");
  Interpolant<double> forth(InterpKind::ForthConstant, levels, tau);
  Interpolant<double> back(InterpKind::BackConstant, levels, tau);
  Interpolant<double> hat(InterpKind::PiecewiseLinear, levels, tau);
  Interpolant<double> tilde(InterpKind::PiecewiseQuadratic, levels, tau);

  InterpIdentityReport rep;

  // ||dt hat||^2_{L2}: dt hat is back-constant at delta_tau z_{n-1} on I_n.
  double alg = 0.0;
  for (int n = 0; n < N; ++n) {
    const double d = hat.delta(n);
    alg += tau * d * d;
  }
  rep.dt_hat_l2_sq_alg = alg;
  double lhs = 0.0;
  for (int n = 1; n <= N; ++n) {
    const double t0 = (n - 1) * tau, t1 = n * tau;
    const double d = hat.delta(n - 1);
    lhs += gauss3([&](double) { return d * d; }, t0, t1);
  }
  rep.dt_hat_l2_sq = lhs;
  rep.dt_hat_res = rel_residual(lhs, alg);

  // ||forth - hat||^2 = (tau^2/3) ||dt hat||^2, same for back - hat.
  auto diff_sq = [&](const Interpolant<double>& pc) {
    double s = 0.0;
    for (int n = 1; n <= N; ++n) {
      const double t0 = (n - 1) * tau, t1 = n * tau;
      s += gauss3(
          [&](double t) {
            const double d = pc.eval(t) - hat.eval(t);
            return d * d;
          },
          t0, t1);
    }
    return s;
  };
  rep.forth_minus_hat_l2_sq = diff_sq(forth);
  rep.forth_minus_hat_alg = tau * tau / 3.0 * rep.dt_hat_l2_sq_alg;
  rep.forth_minus_hat_res = rel_residual(rep.forth_minus_hat_l2_sq, rep.forth_minus_hat_alg);
  rep.back_minus_hat_l2_sq = diff_sq(back);
  rep.back_minus_hat_alg = rep.forth_minus_hat_alg;
  rep.back_minus_hat_res = rel_residual(rep.back_minus_hat_l2_sq, rep.back_minus_hat_alg);

  // ||dt tilde - dt hat||^2 = (tau^2/3) ||dt^2 tilde||^2.
  double d2_alg = 0.0;
  for (int n = 0; n <= N - 2; ++n) {
    const double d2 = tilde.delta2(n);
    d2_alg += tau * d2 * d2;
  }
  double lhs_dt = 0.0;
  for (int n = 1; n <= N; ++n) {
    const double t0 = (n - 1) * tau, t1 = n * tau;
    const double dl = tilde.delta(n - 1);      // dt tilde at the left knot
    const double d2 = tilde.delta2(n - 1);     // slope of dt tilde on the slab
    const double dh = hat.delta(n - 1);        // dt hat on the slab
    lhs_dt += gauss3(
        [&](double t) {
          const double v = dl + d2 * (t - t0) - dh;
          return v * v;
        },
        t0, t1);
  }
  rep.dt_tilde_minus_dt_hat_l2_sq = lhs_dt;
  rep.dt_tilde_minus_dt_hat_alg = tau * tau / 3.0 * d2_alg;
  rep.dt_tilde_minus_dt_hat_res =
      rel_residual(rep.dt_tilde_minus_dt_hat_l2_sq, rep.dt_tilde_minus_dt_hat_alg);

  // ||tilde - hat||^2_{Linf} <= (T tau^2 / 3) ||dt^2 tilde||^2 : per slab the
  // difference is quadratic; its maximum sits at an endpoint or the vertex.
  double linf = 0.0;
  for (int n = 1; n <= N; ++n) {
    const double t0 = (n - 1) * tau, t1 = n * tau;
    for (double t : {t0, t1}) linf = std::max(linf, std::abs(tilde.eval(t) - hat.eval(t)));
    // vertex of the quadratic difference
    const double a2 = 0.5 * tilde.delta2(n - 1);
    if (a2 != 0.0) {
      const double a1 = tilde.delta(n - 1) - hat.delta(n - 1);
      const double tv = t0 - a1 / (2.0 * a2);
      if (tv > t0 && tv < t1) linf = std::max(linf, std::abs(tilde.eval(tv) - hat.eval(tv)));
    }
  }
  rep.tilde_minus_hat_linf_sq = linf * linf;
  rep.tilde_minus_hat_bound = (N * tau) * tau * tau / 3.0 * d2_alg;
  rep.tilde_minus_hat_ok =
      rep.tilde_minus_hat_linf_sq <= rep.tilde_minus_hat_bound * (1.0 + 1e-12) + 1e-300;

  // dt tilde(n tau) = delta_tau z_n at every knot, checked through eval():
  // one-sided 3-point formulas differentiate the slab parabola exactly.
  double kerr = 0.0;
  const double h = 0.25 * tau;
  for (int n = 0; n <= N; ++n) {
    const double t = n * tau;
    double from_eval;
    if (n < N)
      from_eval = (4.0 * tilde.eval(t + h) - 3.0 * tilde.eval(t) - tilde.eval(t + 2.0 * h)) /
                  (2.0 * h);
    else
      from_eval = (3.0 * tilde.eval(t) - 4.0 * tilde.eval(t - h) + tilde.eval(t - 2.0 * h)) /
                  (2.0 * h);
    kerr = std::max(kerr, std::abs(from_eval - tilde.delta(n)));
  }
  rep.knot_derivative_max_err = kerr;

  rep.max_equality_residual =
      std::max({rep.dt_hat_res, rep.forth_minus_hat_res, rep.back_minus_hat_res,
                rep.dt_tilde_minus_dt_hat_res});
  return rep;
}

}  // namespace tmpf
