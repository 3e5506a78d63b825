#include "tmpf/spline.hpp"

#include <cmath>
#include <stdexcept>

namespace tmpf {

CubicSpline::CubicSpline(double x0, double dx, std::vector<double> values)
    : x0_(x0), dx_(dx), y_(std::move(values)) {
  const int n = static_cast<int>(y_.size());
  if (n < 4) throw std::invalid_argument("CubicSpline: need at least 4 samples");
  if (!(dx_ > 0.0)) throw std::invalid_argument("CubicSpline: dx must be positive");

  // Natural spline: tridiagonal solve for second derivatives, m[0] = m[n-1] = 0.
  // Interior rows: m[i-1] + 4 m[i] + m[i+1] = 6 (y[i+1] - 2 y[i] + y[i-1]) / dx^2.
  m_.assign(n, 0.0);
  std::vector<double> rhs(n, 0.0), c(n, 0.0);
  for (int i = 1; i < n - 1; ++i) rhs[i] = 6.0 * (y_[i + 1] - 2.0 * y_[i] + y_[i - 1]) / (dx_ * dx_);
  double beta = 4.0;
  m_[1] = rhs[1] / beta;
  for (int i = 2; i < n - 1; ++i) {
    c[i] = 1.0 / beta;
    beta = 4.0 - c[i];
    m_[i] = (rhs[i] - m_[i - 1]) / beta;
  }
  for (int i = n - 3; i >= 1; --i) m_[i] -= c[i + 1] * m_[i + 1];
}

double CubicSpline::eval(double x, int order) const {
  const int n = static_cast<int>(y_.size());
  const double xmax = x_max();
  const bool below = x < x0_, above = x > xmax;
  const double xc = below ? x0_ : (above ? xmax : x);

  int i = static_cast<int>((xc - x0_) / dx_);
  if (i > n - 2) i = n - 2;
  if (i < 0) i = 0;
  const double t = (xc - (x0_ + i * dx_)) / dx_;
  const double a = 1.0 - t, b = t;

  const double d0 = a * y_[i] + b * y_[i + 1] +
                    dx_ * dx_ / 6.0 * ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]);
  const double d1 = (y_[i + 1] - y_[i]) / dx_ +
                    dx_ / 6.0 * (-(3.0 * a * a - 1.0) * m_[i] + (3.0 * b * b - 1.0) * m_[i + 1]);

  if (below || above) {
    // linear continuation with the end slope
    switch (order) {
      case 0: return d0 + d1 * (x - xc);
      case 1: return d1;
      case 2: return 0.0;
      default: throw std::invalid_argument("CubicSpline::eval: order must be 0..2");
    }
  }
  switch (order) {
    case 0: return d0;
    case 1: return d1;
    case 2: return a * m_[i] + b * m_[i + 1];
    default: throw std::invalid_argument("CubicSpline::eval: order must be 0..2");
  }
}

bool CubicSpline::convex_on_knots(double slack) const {
  for (double m : m_)
    if (m < -slack) return false;
  return true;
}

}  // namespace tmpf
