#include "tmpf/eps_family.hpp"

#include <algorithm>
#include <cmath>

namespace tmpf {

double lambda_eps(double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("lambda_eps: eps must be positive");
  const double bracket =
      0.25 + std::log(1.0 + 1.0 / std::sqrt(eps)) - std::log(2.0) + 0.5 / (1.0 + std::sqrt(eps));
  return 1.0 / bracket;
}

EpsFamily::EpsFamily(ModelFunctions model, double eps) : model_(std::move(model)), eps_(eps) {
  if (!(eps > 0.0) || eps > 1.0)
    throw std::invalid_argument("EpsFamily: eps must lie in (0, 1] (1 accepted for testing)");
  lambda_ = lambda_eps(eps);
  sqrt_eps_ = std::sqrt(eps);
  lambda_star_ = 0.5 * model_.lambda0;

  // Upper band constant: c0 + sup_G * bound on (r+eps)|alpha_eps''|. The kernel
  // contributions obey (r+eps) D <= lambda and (r+eps)|zeta_eps| <= 2 eps; the
  // native part is sampled densely and extended with a flat tail.
  const double a1 = model_.a1(), a2 = model_.a2();
  double native = 0.0;
  for (int i = 0; i <= 20000; ++i) {
    const double r = 50.0 * i / 20000.0;
    native = std::max(native, (r + eps) * std::abs(model_.alpha.eval(r, 2)));
  }
  C_star_ = model_.c0 +
            model_.G.sup_G * (native + std::abs(a1) * lambda_ + 2.0 * eps * std::abs(a2)) + 1e-12;
}

// ---------------------------------------------------------------------------
// Kernels
// ---------------------------------------------------------------------------

double EpsFamily::D(double r) const {
  if (r < 0.0) throw std::invalid_argument("D_eps: r must be nonnegative");
  const double e = eps_, se = sqrt_eps_;
  if (r <= e) return lambda_ * r / (2.0 * e * e);
  if (r < se) return lambda_ / (r + e);
  if (r <= 2.0 * se) return lambda_ * (2.0 * se - r) / (e + e * se);
  return 0.0;
}

double EpsFamily::D1(double r) const {
  if (r < 0.0) throw std::invalid_argument("D1: r must be nonnegative");
  const double e = eps_, se = sqrt_eps_;
  if (r <= e) return lambda_ * r * r / (4.0 * e * e);
  const double at_e = 0.25 * lambda_;
  if (r < se) return at_e + lambda_ * std::log((r + e) / (2.0 * e));
  const double at_se = at_e + lambda_ * std::log((se + e) / (2.0 * e));
  if (r <= 2.0 * se) {
    const double num = 2.0 * se * r - 0.5 * r * r - 1.5 * e;
    return at_se + lambda_ * num / (e + e * se);
  }
  return 1.0;
}

double EpsFamily::D2(double r) const {
  if (r < 0.0) throw std::invalid_argument("D2: r must be nonnegative");
  const double e = eps_, se = sqrt_eps_, l = lambda_;
  if (r <= e) return l * r * r * r / (12.0 * e * e);
  const double at_e = l * e / 12.0;
  if (r < se)
    return at_e + l * (0.25 * (r - e) + (r + e) * std::log((r + e) / (2.0 * e)) - (r - e));
  const double at_se =
      at_e + l * (0.25 * (se - e) + (se + e) * std::log((se + e) / (2.0 * e)) - (se - e));
  const double d1_se = 0.25 * l + l * std::log((se + e) / (2.0 * e));
  if (r <= 2.0 * se) {
    const double poly = se * r * r - r * r * r / 6.0 - 1.5 * e * r + (2.0 / 3.0) * e * se;
    return at_se + d1_se * (r - se) + l * poly / (e * (1.0 + se));
  }
  const double r2 = 2.0 * se;
  const double poly2 = se * r2 * r2 - r2 * r2 * r2 / 6.0 - 1.5 * e * r2 + (2.0 / 3.0) * e * se;
  const double at_2se = at_se + d1_se * (r2 - se) + l * poly2 / (e * (1.0 + se));
  return at_2se + (r - r2);
}

double EpsFamily::zeta_base(double u) {
  if (u < 0.0 || u >= 1.0) return (u == 1.0) ? 0.0 : (u < 0.0 ? 1.0 : 0.0);
  return (1.0 - 4.0 * u) * (1.0 - u) * (1.0 - u);
}

double EpsFamily::zeta(double r) const {
  if (r >= eps_) return 0.0;
  if (r <= 0.0) return 1.0;
  return zeta_base(r / eps_);
}

namespace {
// antiderivatives of the base profile: z1(u) = u(1-u)^3, z2(u) = int_0^u z1
double z1_base(double u) {
  const double w = 1.0 - u;
  return u * w * w * w;
}
double z2_base(double u) {
  return 0.5 * u * u - u * u * u + 0.75 * u * u * u * u - 0.2 * u * u * u * u * u;
}
}  // namespace

double EpsFamily::Z1(double r) const {
  if (r <= 0.0) return 0.0;
  if (r >= eps_) return 0.0;  // z1(1) = 0: the profile has zero mean
  return eps_ * z1_base(r / eps_);
}

double EpsFamily::Z2(double r) const {
  if (r <= 0.0) return 0.0;
  if (r >= eps_) return eps_ * eps_ * z2_base(1.0);  // = eps^2 / 20
  return eps_ * eps_ * z2_base(r / eps_);
}

// ---------------------------------------------------------------------------
// alpha_eps
// ---------------------------------------------------------------------------

double EpsFamily::alpha(double r, int order) const {
  if (r < 0.0) return 0.0;  // extension by zero
  const double a1 = model_.a1(), a2 = model_.a2();
  switch (order) {
    case 0:
      return model_.alpha.eval(r, 0) - a1 * r + a1 * D2(r) - a2 * Z2(r);
    case 1:
      if (r >= 2.0 * sqrt_eps_) return model_.alpha.eval(r, 1);  // D1 == 1, Z1 == 0 here
      return model_.alpha.eval(r, 1) - a1 + a1 * D1(r) - a2 * Z1(r);
    case 2:
      if (r >= 2.0 * sqrt_eps_) return model_.alpha.eval(r, 2);
      return model_.alpha.eval(r, 2) + a1 * D(r) - a2 * zeta(r);
  }
  throw std::invalid_argument("alpha_eps: order must be 0..2");
}

// ---------------------------------------------------------------------------
// Moreau envelope / Yosida operator
// ---------------------------------------------------------------------------

double EpsFamily::moreau_resolvent(double s) const {
  // Solve p + eps * F1'(p) = s; F1' is nondecreasing, so g is strictly increasing.
  auto g = [&](double p) { return p + eps_ * model_.F1.tab.eval(p, 1) - s; };
  // bracket
  double lo = s, hi = s;
  double step = std::max(1.0, std::abs(s));
  while (g(lo) > 0.0) lo -= step, step *= 2.0;
  step = std::max(1.0, std::abs(s));
  while (g(hi) < 0.0) hi += step, step *= 2.0;
  double p = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double gv = g(p);
    if (std::abs(gv) < 1e-14 * std::max(1.0, std::abs(s))) return p;
    if (gv > 0.0) hi = p;
    else lo = p;
    const double dg = 1.0 + eps_ * model_.F1.tab.eval(p, 2);
    double pn = (dg > 0.0) ? p - gv / dg : 0.5 * (lo + hi);
    if (!(pn > lo) || !(pn < hi)) pn = 0.5 * (lo + hi);  // safeguard
    p = pn;
  }
  if (std::abs(g(p)) > 1e-10 * std::max(1.0, std::abs(s)))
    throw SolverError("yosida: resolvent Newton did not converge");
  return p;
}

std::pair<double, double> EpsFamily::yosida(double s) const {
  switch (model_.F1.kind) {
    case F1Spec::Kind::Zero:
      return {0.0, 0.0};
    case F1Spec::Kind::Indicator: {
      const double p = std::clamp(s, -1.0, 1.0);
      const double b = (s - p) / eps_;
      return {0.5 * (s - p) * (s - p) / eps_, b};
    }
    case F1Spec::Kind::TabulatedConvex: {
      const double p = moreau_resolvent(s);
      const double b = (s - p) / eps_;
      return {0.5 * (s - p) * (s - p) / eps_ + model_.F1.tab.eval(p, 0), b};
    }
  }
  throw std::logic_error("yosida: unknown F1 kind");
}

double EpsFamily::beta_prime(double s) const {
  switch (model_.F1.kind) {
    case F1Spec::Kind::Zero:
      return 0.0;
    case F1Spec::Kind::Indicator: {
      if (smoothed_hessian) {
        // C1 ramp over a band of width eps/10 at |s| = 1 (Hessian only).
        const double d = std::abs(s) - 1.0;
        const double w = eps_ / 10.0;
        if (d <= 0.0) return 0.0;
        if (d >= w) return 1.0 / eps_;
        const double t = d / w;
        return (t * t * (3.0 - 2.0 * t)) / eps_;
      }
      return (std::abs(s) > 1.0) ? 1.0 / eps_ : 0.0;
    }
    case F1Spec::Kind::TabulatedConvex: {
      const double p = moreau_resolvent(s);
      const double fpp = std::max(0.0, model_.F1.tab.eval(p, 2));
      return fpp / (1.0 + eps_ * fpp);
    }
  }
  throw std::logic_error("beta_prime: unknown F1 kind");
}

// ---------------------------------------------------------------------------
// Mollified G and gamma
// ---------------------------------------------------------------------------

namespace {

// 16-point Gauss-Legendre on [-1, 1].
constexpr int kGL = 8;
constexpr double kGLx[kGL] = {0.095012509837637440185, 0.281603550779258913230,
                              0.458016777657227386342, 0.617876244402643748447,
                              0.755404408355003033895, 0.865631202387831743880,
                              0.944575023073232576078, 0.989400934991649932596};
constexpr double kGLw[kGL] = {0.189450610455068496285, 0.182603415044923588867,
                              0.169156519395002538189, 0.149595988816576732081,
                              0.124628971255533872052, 0.095158511682492784810,
                              0.062253523938647892863, 0.027152459411754094852};

// normalized quartic bump on [-1,1]: (15/16)(1-u^2)^2
double bump(double u) {
  const double w = 1.0 - u * u;
  return 0.9375 * w * w;
}

}  // namespace

double EpsFamily::G(double s, int order) const {
  if (model_.G.kind == GSpec::Kind::Zero) return 0.0;
  // shifted dead-zone profile
  auto shifted = [&](double r, int ord) -> double {
    if (r >= eps_) return model_.G.eval(r - eps_, ord);
    if (r <= -eps_) return model_.G.eval(r + eps_, ord);
    return 0.0;
  };
  // mollifier radius eps/2 keeps an exact dead zone |s| <= eps/2
  const double rad = 0.5 * eps_;
  if (std::abs(s) + rad <= eps_) return 0.0;
  double acc = 0.0;
  for (int k = 0; k < kGL; ++k) {
    const double up = kGLx[k], wq = kGLw[k];
    acc += wq * (shifted(s - rad * up, order) * bump(up) + shifted(s + rad * up, order) * bump(-up));
  }
  return acc;
}

double EpsFamily::gamma(double s, int order) const {
  const double sgn = (s > 0.0) ? 1.0 : (s < 0.0 ? -1.0 : 0.0);
  return G(s, order) * sgn;
}

// ---------------------------------------------------------------------------
// F_eps, phi_eps, parabolic coefficient
// ---------------------------------------------------------------------------

double EpsFamily::F_eps(double s) const { return F1eps(s) + model_.F2.eval(s, 0); }
double EpsFamily::F_eps_prime(double s) const { return beta(s) + model_.F2.eval(s, 1); }
double EpsFamily::F_eps_second(double s) const { return beta_prime(s) + model_.F2.eval(s, 2); }

double EpsFamily::phi(double r, double s) const {
  if (r < 0.0) return model_.c0 * r;  // alpha_eps vanishes on r < 0
  return model_.c0 * r + (alpha(r, 0) - (r + eps_) * alpha(r, 1)) * G(s, 0);
}

double EpsFamily::parabolic_coeff_unchecked(double r, double s) const {
  if (r < 0.0) return model_.c0;
  return model_.c0 - (r + eps_) * alpha(r, 2) * G(s, 0);
}

double EpsFamily::parabolic_coeff(double r, double s) const {
  const double a = parabolic_coeff_unchecked(r, s);
  if (r >= 0.0 && (a < lambda_star_ - 1e-12 || a > C_star_ + 1e-12))
    throw BandViolation("parabolic coefficient outside [lambda_star, C_star]: a = " +
                        std::to_string(a) + " at r = " + std::to_string(r) +
                        ", s = " + std::to_string(s) + " (eps too large for this model?)");
  return a;
}

ScalarField EpsFamily::w_of(const ScalarField& theta, const ScalarField& chi,
                            bool check_band) const {
  require_same_grid(theta.grid, chi.grid, "w_of");
  ScalarField w(theta.grid);
  for (int k = 0; k < w.size(); ++k) {
    w[k] = phi(theta[k], chi[k]);
    if (check_band && theta[k] >= 0.0) {
      const double lo = lambda_star_ * theta[k], hi = C_star_ * theta[k];
      const double slack = 1e-10 * std::max(1.0, std::abs(theta[k]));
      if (w[k] < lo - slack || w[k] > hi + slack)
        throw BandViolation("w_of: enthalpy outside the [lambda_star, C_star] band at a node");
    }
  }
  return w;
}

}  // namespace tmpf
