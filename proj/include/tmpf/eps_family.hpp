#pragma once

#include <utility>

#include "tmpf/grid.hpp"
#include "tmpf/model_functions.hpp"

namespace tmpf {

/// Closed-form normalization of the Dirac-approximating kernel:
/// lambda * {1/4 + ln(1 + eps^{-1/2}) - ln 2 + 1/(2(1 + eps^{1/2}))} = 1.
double lambda_eps(double eps);

struct BandViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One eps-indexed regularization bundle: the kernels D_eps, zeta_eps and the
/// smoothed constitutive functions alpha_eps, F1_eps/beta_eps, G_eps/gamma_eps,
/// phi_eps, together with the parabolicity band [lambda_star, C_star].
class EpsFamily {
 public:
  EpsFamily(ModelFunctions model, double eps);

  double eps() const { return eps_; }
  double lambda() const { return lambda_; }
  double lambda_star() const { return lambda_star_; }
  double C_star() const { return C_star_; }
  const ModelFunctions& model() const { return model_; }

  // Dirac-approximating kernel and its antiderivatives (piecewise closed form).
  double D(double r) const;
  double D1(double r) const;  // int_0^r D
  double D2(double r) const;  // int_0^r D1

  // Base zero-mean profile zeta(r) = (1-4r)(1-r)^2 on [0,1] and its scaling.
  static double zeta_base(double u);
  double zeta(double r) const;  // zeta(r/eps)
  double Z1(double r) const;    // int_0^r zeta_eps
  double Z2(double r) const;    // int_0^r Z1

  /// alpha_eps, orders 0..2; extended by zero for r < 0.
  double alpha(double r, int order) const;

  /// Moreau envelope and Yosida operator of F1: {F1_eps(s), beta_eps(s)}.
  std::pair<double, double> yosida(double s) const;
  double beta(double s) const { return yosida(s).second; }
  double F1eps(double s) const { return yosida(s).first; }
  /// Derivative of beta_eps (piecewise for the indicator; resolvent rule otherwise).
  double beta_prime(double s) const;

  /// Mollified G and gamma, orders 0..1.
  double G(double s, int order) const;
  double gamma(double s, int order) const;

  /// F_eps = F1_eps + F2 and its derivatives used by the chi-step.
  double F_eps(double s) const;
  double F_eps_prime(double s) const;
  double F_eps_second(double s) const;  // beta_eps' + pi'

  /// phi_eps(r,s) = c0 r + (alpha_eps(r) - (r+eps) alpha_eps'(r)) G_eps(s).
  double phi(double r, double s) const;

  /// Parabolic coefficient a_eps(r,s) = c0 - (r+eps) alpha_eps''(r) G_eps(s).
  /// Throws BandViolation outside [lambda_star, C_star] (r >= 0 side).
  double parabolic_coeff(double r, double s) const;
  double parabolic_coeff_unchecked(double r, double s) const;

  /// w = phi_eps(theta, chi) nodewise. With check_band, asserts
  /// lambda_star*theta <= w <= C_star*theta at nodes with theta >= 0.
  ScalarField w_of(const ScalarField& theta, const ScalarField& chi, bool check_band = false) const;

  /// Hessian smoothing option for the chi-step: C1-ramps the indicator's
  /// F1_eps'' over a band of width eps/10 at |s| = 1 (residual unchanged).
  bool smoothed_hessian = false;

 private:
  ModelFunctions model_;
  double eps_ = 0.1;
  double lambda_ = 0.0;
  double sqrt_eps_ = 0.0;
  double lambda_star_ = 0.0;
  double C_star_ = 0.0;

  double moreau_resolvent(double s) const;  // prox point for the tabulated kind
};

}  // namespace tmpf
