#pragma once

#include <cmath>

namespace tmpf {

template <class Op>
SolveReport conjugate_gradient(const Grid& g, Op&& apply, const std::vector<double>& diag,
                               const ScalarField& rhs, ScalarField& x, double tol, int max_iter) {
  const int n = g.count();
  SolveReport rep;

  auto l2 = [](const std::vector<double>& a) {
    double s = 0.0;
    for (double t : a) s += t * t;
    return std::sqrt(s);
  };

  const double rhs_norm = l2(rhs.v);
  if (rhs_norm == 0.0) {
    x = ScalarField(g, 0.0);
    rep.converged = true;
    return rep;
  }
  const double target = tol * rhs_norm;

  if (x.size() != n) x = ScalarField(g, 0.0);

  ScalarField r(g), z(g), p(g), Ap(g);
  // r = rhs - A x
  apply(x, Ap);
  for (int i = 0; i < n; ++i) r[i] = rhs[i] - Ap[i];

  // Outer loop re-forms the true residual after recurrence convergence.
  for (int restart = 0; restart < 4; ++restart) {
    double rnorm = l2(r.v);
    if (rnorm <= target) {
      rep.residual = rnorm;
      rep.converged = true;
      return rep;
    }
    for (int i = 0; i < n; ++i) z[i] = r[i] / diag[i];
    p = z;
    double rz = inner(r, z);

    while (rep.iterations < max_iter) {
      apply(p, Ap);
      const double pAp = inner(p, Ap);
      if (!(pAp > 0.0)) break;  // loss of positivity: drop to restart/recompute
      const double alpha = rz / pAp;
      for (int i = 0; i < n; ++i) x[i] += alpha * p[i];
      for (int i = 0; i < n; ++i) r[i] -= alpha * Ap[i];
      ++rep.iterations;

      rnorm = l2(r.v);
      if (rnorm <= target) break;

      for (int i = 0; i < n; ++i) z[i] = r[i] / diag[i];
      const double rz_new = inner(r, z);
      const double beta = rz_new / rz;
      rz = rz_new;
      for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }

    // Recompute the true residual; the recurrence may have drifted.
    apply(x, Ap);
    for (int i = 0; i < n; ++i) r[i] = rhs[i] - Ap[i];
    if (l2(r.v) <= target) {
      rep.residual = l2(r.v);
      rep.converged = true;
      return rep;
    }
    if (rep.iterations >= max_iter) break;
  }

  rep.residual = l2(r.v);
  rep.converged = rep.residual <= target;
  return rep;
}

}  // namespace tmpf
