#pragma once

#include <array>
#include <string>

#include "tmpf/spline.hpp"

namespace tmpf {

/// alpha: C^2 on [0, inf) with alpha(0) = 0.
struct AlphaSpec {
  enum class Kind { ExpSaturating, GaussianWell, Tabulated };
  Kind kind = Kind::ExpSaturating;
  double A = 0.5;    // amplitude
  double rho = 1.0;  // width (GaussianWell)
  CubicSpline tab;

  double eval(double r, int order) const;
};

/// G: C^1, nonnegative and bounded, G(0) = G'(0) = 0, G' Lipschitz.
struct GSpec {
  enum class Kind { RationalSaturating, Zero, Tabulated };
  Kind kind = Kind::RationalSaturating;
  CubicSpline tab;
  // certificates (built in for presets, declared for tabulated data)
  double sup_G = 1.0;
  double sup_Gp = 0.6495190528383289;  // max of 2s/(1+s^2)^2
  double lip_Gp = 2.0;

  double eval(double s, int order) const;
};

/// F2: smooth concave/convex part, pi = F2'.
struct F2Spec {
  enum class Kind { QuadraticWell, QuadraticStable, Zero, Tabulated };
  Kind kind = Kind::QuadraticWell;
  CubicSpline tab;  // samples of F2
  double sup_pi_prime = 1.0;

  double eval(double s, int order) const;  // order 0: F2, 1: pi, 2: pi'
};

/// F1: convex, proper, lsc, nonnegative part of the potential.
struct F1Spec {
  enum class Kind { Indicator, Zero, TabulatedConvex };
  Kind kind = Kind::Indicator;
  CubicSpline tab;  // samples of F1 (convex); resolvent solved by safeguarded Newton

  /// F1 value; +inf encoded as HUGE_VAL for the indicator outside [-1,1].
  double value(double s) const;
  bool finite_at(double s) const;
};

/// The unregularized constitutive bundle with its bound certificates.
struct ModelFunctions {
  double c0 = 1.0;
  double kappa = 1.0;
  double theta_c = 1.0;
  std::array<double, 2> e{1.0, 0.0};
  double lambda0 = 1.0;  // parabolicity margin, in (0, c0]

  AlphaSpec alpha;
  F1Spec F1;
  F2Spec F2;
  GSpec G;

  double a1() const { return alpha.eval(0.0, 1); }
  double a2() const { return alpha.eval(0.0, 2); }

  double gamma(double s) const;  // G(s) sign(s)

  /// tau* = 1/(theta_c * sup|pi'|); +inf when pi' == 0.
  double tau_star() const;

  /// Checks positivity of constants, |e| = 1, alpha(0) = 0, G(0) = G'(0) = 0,
  /// the parabolicity band and boundedness certificates on a sample grid.
  void validate() const;

  static ModelFunctions preset(const std::string& name);
};

}  // namespace tmpf
