// Test-only oracles, independent of the library's evaluation paths:
// adaptive Simpson quadrature, a dense Gaussian-elimination solver, and a
// seeded RNG helper.
#pragma once

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

namespace oracles {

inline double simpson_rule(double fa, double fm, double fb, double a, double b) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <class F>
double adaptive_simpson(F&& f, double a, double b, double tol, int depth = 0) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = simpson_rule(fa, fm, fb, a, b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double left = simpson_rule(fa, f(lm), fm, a, m);
  const double right = simpson_rule(fm, f(rm), fb, m, b);
  if (depth > 42 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, m, 0.5 * tol, depth + 1) +
         adaptive_simpson(f, m, b, 0.5 * tol, depth + 1);
}

/// Dense solve of A x = b by Gaussian elimination with partial pivoting.
inline std::vector<double> dense_solve(std::vector<std::vector<double>> A, std::vector<double> b) {
  const int n = static_cast<int>(b.size());
  for (int k = 0; k < n; ++k) {
    int piv = k;
    for (int i = k + 1; i < n; ++i)
      if (std::abs(A[i][k]) > std::abs(A[piv][k])) piv = i;
    std::swap(A[k], A[piv]);
    std::swap(b[k], b[piv]);
    if (A[k][k] == 0.0) throw std::runtime_error("dense_solve: singular matrix");
    for (int i = k + 1; i < n; ++i) {
      const double f = A[i][k] / A[k][k];
      if (f == 0.0) continue;
      for (int j = k; j < n; ++j) A[i][j] -= f * A[k][j];
      b[i] -= f * b[k];
    }
  }
  std::vector<double> x(n);
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int j = i + 1; j < n; ++j) s -= A[i][j] * x[j];
    x[i] = s / A[i][i];
  }
  return x;
}

inline std::mt19937_64 rng(std::uint64_t seed = 20240817ull) { return std::mt19937_64(seed); }

}  // namespace oracles
