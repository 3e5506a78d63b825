#pragma once

#include <vector>

namespace tmpf {

/// Natural cubic spline on uniform knots, with linear extrapolation outside
/// [x0, x0 + dx*(m-1)]. Supports derivatives of order 0..2.
class CubicSpline {
 public:
  CubicSpline() = default;
  CubicSpline(double x0, double dx, std::vector<double> values);

  double eval(double x, int order = 0) const;
  bool empty() const { return y_.empty(); }
  double x_min() const { return x0_; }
  double dx() const { return dx_; }
  const std::vector<double>& values() const { return y_; }
  double x_max() const { return x0_ + dx_ * (static_cast<double>(y_.size()) - 1.0); }

  /// Convexity check: second derivative nonnegative at all knots (with slack).
  bool convex_on_knots(double slack = 1e-10) const;

 private:
  double x0_ = 0.0, dx_ = 1.0;
  std::vector<double> y_;
  std::vector<double> m_;  // second derivatives at knots
};

}  // namespace tmpf
