#pragma once

#include <vector>

#include "tmpf/eps_family.hpp"
#include "tmpf/grid.hpp"

namespace tmpf {

/// Scalar time profile for separable space-time sources.
struct TimeProfile {
  enum class Kind { Constant, Linear, Sine };
  Kind kind = Kind::Constant;
  double omega = 1.0;   // Sine frequency
  double phase = 0.0;

  double eval(double t) const;
  /// Exact average over [t0, t1] (3-point Gauss; exact for these profiles).
  double slab_average(double t0, double t1) const;
};

/// Separable source f(x,t) = space(x) * time(t).
struct SeparableSource {
  ScalarField space;
  TimeProfile time;

  ScalarField at(double t) const;
  ScalarField slab_mean(double t0, double t1) const;
};

/// Separable boundary forcing b(x,t) = space(x) * time(t), x on the boundary.
struct BoundaryForcing {
  BoundaryValues space;
  TimeProfile time;

  BoundaryValues at(double t) const;
};

/// Raw (unregularized) data of the problem.
struct InitialData {
  ScalarField theta0;
  ScalarField u0;
  ScalarField u0_prime;
  ScalarField chi0;
  SeparableSource R;        // heat source, R >= 0
  SeparableSource B_omega;  // interior load
  BoundaryForcing b_gamma;  // boundary traction datum

  /// Checks theta0 >= 0, finiteness, F1(chi0) finite nodewise, R >= 0 at samples.
  void validate(const ModelFunctions& model, double T) const;
};

/// Forcing vectors of one discrete run: R_n are slab averages, B_n point samples.
struct DiscreteForcing {
  std::vector<ScalarField> R;        // n = 0..N-1, slab averages of R
  std::vector<ScalarField> B_omega;  // n = 0..N-1, samples at n*tau
  std::vector<BoundaryValues> b_gamma;  // n = 0..N-1, samples at n*tau
};

/// Smoothed data for one eps.
struct PreparedData {
  ScalarField theta0_eps;
  ScalarField chi0_eps;
  ScalarField u0_eps;
  ScalarField u0_prime_eps;
  VectorField sigma0_eps;
  ScalarField w0_eps;
};

/// theta0_eps - eps lap(theta0_eps) = theta0.
ScalarField smooth_theta0(const ScalarField& theta0, double eps, double tol = 1e-12);

/// chi0_eps - eps lap(chi0_eps) + eps beta_eps(chi0_eps) = chi0 (semismooth Newton).
ScalarField smooth_chi0(const ScalarField& chi0, const EpsFamily& fam, double tol = 1e-10);

/// u0_eps from the weak elliptic problem with sigma0_eps flux, then
/// sigma0_eps = kappa grad(u0_eps) - gamma_eps(chi0_eps) e.
std::pair<ScalarField, VectorField> build_u0eps(const ScalarField& u0, const ScalarField& chi0_eps,
                                                const EpsFamily& fam, double tol = 1e-12);

/// w0_eps = phi_eps(theta0_eps, chi0_eps) nodewise, with the band assertion.
ScalarField build_w0eps(const ScalarField& theta0_eps, const ScalarField& chi0_eps,
                        const EpsFamily& fam);

/// All smoothed data plus the forcing vectors.
PreparedData prepare_data(const InitialData& data, const EpsFamily& fam, double tol = 1e-12);

/// R_n := (1/tau) int_{n tau}^{(n+1) tau} R, B_n := B(n tau), n = 0..N-1.
DiscreteForcing discretize_forcing(const InitialData& data, int N, double tau);

}  // namespace tmpf
