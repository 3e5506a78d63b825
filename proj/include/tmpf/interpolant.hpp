#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace tmpf {

enum class InterpKind { ForthConstant, BackConstant, PiecewiseLinear, PiecewiseQuadratic };

/// Time interpolant of a level vector (z_0..z_N) on slabs I_n = ((n-1)tau, n tau].
/// The quadratic kind uses the ghost coordinate z_{N+1} := 2 z_N - z_{N-1}, so
/// that delta_tau z_N = delta_tau z_{N-1} and delta_tau^2 z_{N-1} = 0.
/// T needs: copy, T+T, double*T (ScalarField and double both qualify).
template <class T>
class Interpolant {
 public:
  Interpolant(InterpKind kind, std::vector<T> levels, double tau)
      : kind_(kind), z_(std::move(levels)), tau_(tau) {
    if (z_.size() < 3) throw std::invalid_argument("interpolant: need N >= 2 levels");
    if (!(tau_ > 0.0)) throw std::invalid_argument("interpolant: tau must be positive");
    if (kind_ == InterpKind::PiecewiseQuadratic) build_quadratic_knots();
  }

  int N() const { return static_cast<int>(z_.size()) - 1; }
  double tau() const { return tau_; }
  double T_final() const { return tau_ * N(); }
  const T& level(int n) const { return z_.at(n); }

  /// z_{N+1} = 2 z_N - z_{N-1}.
  T ghost() const { return 2.0 * z_[N()] + (-1.0) * z_[N() - 1]; }

  /// delta_tau z_n for n = 0..N (n = N uses the ghost).
  T delta(int n) const {
    if (n < 0 || n > N()) throw std::out_of_range("interpolant: delta index");
    if (n == N()) return (1.0 / tau_) * (ghost() + (-1.0) * z_[n]);
    return (1.0 / tau_) * (z_[n + 1] + (-1.0) * z_[n]);
  }

  /// delta_tau^2 z_n for n = 0..N-1 (n = N-1 vanishes by the ghost).
  T delta2(int n) const {
    if (n < 0 || n > N() - 1) throw std::out_of_range("interpolant: delta2 index");
    return (1.0 / tau_) * (delta(n + 1) + (-1.0) * delta(n));
  }

  T eval(double t) const {
    if (t < -1e-12 * tau_ || t > T_final() + 1e-12 * tau_)
      throw std::out_of_range("interpolant: t outside [0, T]");
    const int n = slab(t);
    switch (kind_) {
      case InterpKind::ForthConstant:
        return z_[n];
      case InterpKind::BackConstant:
        return z_[n - 1];
      case InterpKind::PiecewiseLinear: {
        const double s = (t - (n - 1) * tau_) / tau_;
        return (1.0 - s) * z_[n - 1] + s * z_[n];
      }
      case InterpKind::PiecewiseQuadratic: {
        const double dt = t - (n - 1) * tau_;
        // value at the left knot + dt * derivative + dt^2/2 * second difference
        return qknots_[n - 1] + dt * delta(n - 1) + (0.5 * dt * dt) * delta2(n - 1);
      }
    }
    throw std::logic_error("interpolant: unknown kind");
  }

  /// d/dt of the quadratic interpolant at knot n equals delta_tau z_n.
  T derivative_at_knot(int n) const { return delta(n); }

 private:
  int slab(double t) const {
    int n = static_cast<int>(std::ceil(t / tau_ - 1e-12));
    if (n < 1) n = 1;
    if (n > N()) n = N();
    return n;
  }

  void build_quadratic_knots() {
    qknots_.clear();
    qknots_.reserve(z_.size());
    qknots_.push_back(z_[0]);
    for (int n = 1; n <= N(); ++n)
      qknots_.push_back(qknots_[n - 1] + tau_ * delta(n - 1) + (0.5 * tau_ * tau_) * delta2(n - 1));
  }

  InterpKind kind_;
  std::vector<T> z_;
  double tau_;
  std::vector<T> qknots_;  // quadratic-kind values at knots
};

/// Residual report of the interpolation-map identities, checked by exact slab
/// integration (the integrands are polynomials of degree <= 2 per slab).
struct InterpIdentityReport {
  // each entry: {lhs, rhs, relative residual}
  double dt_hat_l2_sq = 0.0, dt_hat_l2_sq_alg = 0.0, dt_hat_res = 0.0;
  double forth_minus_hat_l2_sq = 0.0, forth_minus_hat_alg = 0.0, forth_minus_hat_res = 0.0;
  double back_minus_hat_l2_sq = 0.0, back_minus_hat_alg = 0.0, back_minus_hat_res = 0.0;
  double dt_tilde_minus_dt_hat_l2_sq = 0.0, dt_tilde_minus_dt_hat_alg = 0.0,
         dt_tilde_minus_dt_hat_res = 0.0;
  double tilde_minus_hat_linf_sq = 0.0, tilde_minus_hat_bound = 0.0;
  bool tilde_minus_hat_ok = false;
  double knot_derivative_max_err = 0.0;  // max_n |d/dt z~(n tau) - delta_tau z_n|
  double max_equality_residual = 0.0;
};

/// Scalar level vectors (the property-test form of the identity suite).
InterpIdentityReport interp_identity_suite(const std::vector<double>& levels, double tau);

}  // namespace tmpf
