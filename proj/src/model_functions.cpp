#include "tmpf/model_functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tmpf {

double AlphaSpec::eval(double r, int order) const {
  switch (kind) {
    case Kind::ExpSaturating: {
      const double ex = std::exp(-r);
      switch (order) {
        case 0: return A * (1.0 - ex);
        case 1: return A * ex;
        case 2: return -A * ex;
      }
      break;
    }
    case Kind::GaussianWell: {
      const double u = r / rho;
      const double ex = std::exp(-u * u);
      switch (order) {
        case 0: return A * (1.0 - ex);
        case 1: return 2.0 * A * r / (rho * rho) * ex;
        case 2: return 2.0 * A / (rho * rho) * (1.0 - 2.0 * u * u) * ex;
      }
      break;
    }
    case Kind::Tabulated:
      return tab.eval(r, order);
  }
  throw std::invalid_argument("alpha: order must be 0..2");
}

double GSpec::eval(double s, int order) const {
  switch (kind) {
    case Kind::RationalSaturating: {
      const double d = 1.0 + s * s;
      switch (order) {
        case 0: return s * s / d;
        case 1: return 2.0 * s / (d * d);
      }
      break;
    }
    case Kind::Zero:
      return 0.0;
    case Kind::Tabulated:
      return tab.eval(s, order);
  }
  throw std::invalid_argument("G: order must be 0..1");
}

double F2Spec::eval(double s, int order) const {
  switch (kind) {
    case Kind::QuadraticWell:
      switch (order) {
        case 0: return -0.5 * s * s;
        case 1: return -s;
        case 2: return -1.0;
      }
      break;
    case Kind::QuadraticStable:
      switch (order) {
        case 0: return 0.5 * s * s;
        case 1: return s;
        case 2: return 1.0;
      }
      break;
    case Kind::Zero:
      return 0.0;
    case Kind::Tabulated:
      return tab.eval(s, order);
  }
  throw std::invalid_argument("F2: order must be 0..2");
}

double F1Spec::value(double s) const {
  switch (kind) {
    case Kind::Indicator:
      return (s >= -1.0 && s <= 1.0) ? 0.0 : HUGE_VAL;
    case Kind::Zero:
      return 0.0;
    case Kind::TabulatedConvex:
      return tab.eval(s, 0);
  }
  throw std::logic_error("F1: unknown kind");
}

bool F1Spec::finite_at(double s) const { return std::isfinite(value(s)); }

double ModelFunctions::gamma(double s) const {
  const double sgn = (s > 0.0) ? 1.0 : (s < 0.0 ? -1.0 : 0.0);
  return G.eval(s, 0) * sgn;
}

double ModelFunctions::tau_star() const {
  const double sp = F2.sup_pi_prime;
  if (sp <= 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / (theta_c * sp);
}

void ModelFunctions::validate() const {
  if (!(c0 > 0.0) || !(kappa > 0.0) || !(theta_c > 0.0))
    throw std::invalid_argument("model: c0, kappa, theta_c must be positive");
  const double en = std::sqrt(e[0] * e[0] + e[1] * e[1]);
  if (std::abs(en - 1.0) > 1e-9) throw std::invalid_argument("model: |e| must be 1");
  if (!(lambda0 > 0.0) || lambda0 > c0)
    throw std::invalid_argument("model: lambda0 must lie in (0, c0]");
  if (std::abs(alpha.eval(0.0, 0)) > 1e-12) throw std::invalid_argument("model: alpha(0) must be 0");
  if (std::abs(G.eval(0.0, 0)) > 1e-12 || std::abs(G.eval(0.0, 1)) > 1e-12)
    throw std::invalid_argument("model: G(0) and G'(0) must be 0");
  if (F1.kind == F1Spec::Kind::TabulatedConvex && !F1.tab.convex_on_knots())
    throw std::invalid_argument("model: tabulated F1 samples are not convex");

  // Sampled certificate checks: parabolicity c0 - r a''(r) G(s) >= lambda0,
  // boundedness |a| + |r a'| + r |a''| <= C for r >= 1, bounds on G.
  double bound_c = 0.0;
  for (int i = 0; i <= 4000; ++i) {
    const double r = 50.0 * i / 4000.0;
    const double app = alpha.eval(r, 2);
    double worst = 0.0;  // max of r*app*G(s) over s
    for (int j = 0; j <= 80; ++j) {
      const double s = -4.0 + 8.0 * j / 80.0;
      worst = std::max(worst, r * app * G.eval(s, 0));
    }
    worst = std::max(worst, r * app * G.sup_G);
    if (c0 - worst < lambda0 - 1e-9)
      throw std::invalid_argument("model: parabolicity certificate lambda0 fails at sampled r");
    if (r >= 1.0)
      bound_c = std::max(bound_c, std::abs(alpha.eval(r, 0)) + std::abs(r * alpha.eval(r, 1)) +
                                      r * std::abs(app));
  }
  (void)bound_c;  // finite by construction; growth beyond the sample window is the user's certificate
  for (int j = 0; j <= 4000; ++j) {
    const double s = -20.0 + 40.0 * j / 4000.0;
    const double g = G.eval(s, 0);
    if (g < -1e-12 || g > G.sup_G + 1e-9)
      throw std::invalid_argument("model: G outside [0, sup_G] at sampled s");
    if (std::abs(G.eval(s, 1)) > G.sup_Gp + 1e-9)
      throw std::invalid_argument("model: |G'| exceeds its certificate at sampled s");
  }
}

ModelFunctions ModelFunctions::preset(const std::string& name) {
  ModelFunctions m;
  if (name == "default") {
    return m;  // the defaults above are the default experiment model
  }
  if (name == "decoupled") {
    m.G.kind = GSpec::Kind::Zero;
    m.G.sup_G = 0.0;
    m.G.sup_Gp = 0.0;
    m.G.lip_Gp = 0.0;
    return m;
  }
  if (name == "unconstrained") {
    m.F1.kind = F1Spec::Kind::Zero;
    return m;
  }
  if (name == "hostile") {
    m.c0 = 9.5;
    m.lambda0 = 0.5;
    m.theta_c = 0.5;
    m.alpha.kind = AlphaSpec::Kind::GaussianWell;
    m.alpha.A = 16.0;
    m.alpha.rho = 1.0;
    return m;
  }
  throw std::invalid_argument("unknown model preset: " + name);
}

}  // namespace tmpf
