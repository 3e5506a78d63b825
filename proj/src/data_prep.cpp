#include "tmpf/data_prep.hpp"

#include <cmath>
#include <sstream>

namespace tmpf {

double TimeProfile::eval(double t) const {
  switch (kind) {
    case Kind::Constant: return 1.0;
    case Kind::Linear: return t;
    case Kind::Sine: return std::sin(omega * t + phase);
  }
  return 1.0;
}

double TimeProfile::slab_average(double t0, double t1) const {
  if (kind == Kind::Constant) return 1.0;
  if (kind == Kind::Linear) return 0.5 * (t0 + t1);
  const double mid = 0.5 * (t0 + t1), half = 0.5 * (t1 - t0);
  const double x = 0.774596669241483377036;  // 3-point Gauss
  return (5.0 * eval(mid - half * x) + 8.0 * eval(mid) + 5.0 * eval(mid + half * x)) / 18.0;
}

ScalarField SeparableSource::at(double t) const {
  ScalarField out = space;
  out *= time.eval(t);
  return out;
}

ScalarField SeparableSource::slab_mean(double t0, double t1) const {
  ScalarField out = space;
  out *= time.slab_average(t0, t1);
  return out;
}

BoundaryValues BoundaryForcing::at(double t) const { return space.scaled(time.eval(t)); }

void InitialData::validate(const ModelFunctions& model, double T) const {
  require_same_grid(theta0.grid, u0.grid, "initial data");
  require_same_grid(theta0.grid, u0_prime.grid, "initial data");
  require_same_grid(theta0.grid, chi0.grid, "initial data");
  for (const ScalarField* f : {&theta0, &u0, &u0_prime, &chi0})
    if (!f->all_finite()) throw std::invalid_argument("initial data: non-finite nodal value");
  for (double t : theta0.v)
    if (t < 0.0) throw std::invalid_argument("initial data: theta0 must be nonnegative");
  for (double s : chi0.v)
    if (!model.F1.finite_at(s))
      throw std::invalid_argument("initial data: F1(chi0) must be finite nodewise");
  // R >= 0 at time samples
  for (int k = 0; k <= 16; ++k) {
    const double t = T * k / 16.0;
    const double f = R.time.eval(t);
    for (double s : R.space.v)
      if (s * f < -1e-14) throw std::invalid_argument("initial data: R must be nonnegative");
  }
}

ScalarField smooth_theta0(const ScalarField& theta0, double eps, double tol) {
  return solve_helmholtz(1.0, eps, theta0, tol);
}

ScalarField smooth_chi0(const ScalarField& chi0, const EpsFamily& fam, double tol) {
  const Grid& g = chi0.grid;
  const double eps = fam.eps();
  ScalarField x = chi0;  // initial guess

  std::ostringstream history;
  for (int it = 0; it < 60; ++it) {
    // residual H(x) = x - eps lap x + eps beta_eps(x) - chi0
    ScalarField lap = laplacian_neumann(x);
    ScalarField res(g);
    for (int k = 0; k < res.size(); ++k)
      res[k] = x[k] - eps * lap[k] + eps * fam.beta(x[k]) - chi0[k];
    const double rn = norm(res, NormKind::L2);
    history << (it ? " " : "") << rn;
    if (rn <= tol) return x;

    // Jacobian: I - eps lap + eps diag(beta')
    std::vector<double> bp(g.count());
    for (int k = 0; k < g.count(); ++k) bp[k] = fam.beta_prime(x[k]);
    std::vector<double> diag(g.count());
    for (int i = 0; i < g.nodes[0]; ++i)
      for (int j = 0; j < g.nodes[1]; ++j) {
        double d = 1.0 + eps * bp[g.idx(i, j)];
        for (int a = 0; a < g.dim; ++a) {
          const double h = g.spacing(a);
          d += 2.0 * eps / (h * h);
        }
        diag[g.idx(i, j)] = d;
      }
    auto apply = [&](const ScalarField& v, ScalarField& out) {
      out = laplacian_neumann(v);
      for (int k = 0; k < out.size(); ++k) out[k] = v[k] - eps * out[k] + eps * bp[k] * v[k];
    };
    ScalarField delta(g, 0.0);
    ScalarField neg = res;
    neg *= -1.0;
    const double inner_tol = std::clamp(0.1 * tol / rn, 1e-12, 1e-2);
    SolveReport rep = conjugate_gradient(g, apply, diag, neg, delta, inner_tol, 50 * g.count());
    if (!rep.converged) throw SolverError("smooth_chi0: inner CG failed");

    // damped update
    double step = 1.0;
    for (int bt = 0; bt < 40; ++bt) {
      ScalarField trial = x;
      trial.axpy(step, delta);
      ScalarField lapt = laplacian_neumann(trial);
      double rt = 0.0;
      ScalarField rest(g);
      for (int k = 0; k < rest.size(); ++k)
        rest[k] = trial[k] - eps * lapt[k] + eps * fam.beta(trial[k]) - chi0[k];
      rt = norm(rest, NormKind::L2);
      if (rt <= (1.0 - 1e-4 * step) * rn || rt <= tol) {
        x = trial;
        break;
      }
      step *= 0.5;
      if (bt == 39) throw SolverError("smooth_chi0: Newton stagnation, residuals: " + history.str());
    }
  }
  throw SolverError("smooth_chi0: Newton did not converge, residuals: " + history.str());
}

std::pair<ScalarField, VectorField> build_u0eps(const ScalarField& u0, const ScalarField& chi0_eps,
                                                const EpsFamily& fam, double tol) {
  const Grid& g = u0.grid;
  const ModelFunctions& m = fam.model();
  const double eps = fam.eps();

  // weak form: (u0e, v) + eps [ kappa d(u0e, v) - (gamma_eps(chi0e), e . grad v)_edge ] = (u0, v)
  ScalarField gam(g);
  for (int k = 0; k < gam.size(); ++k) gam[k] = fam.gamma(chi0_eps[k], 0);
  ScalarField rhs = u0;
  rhs.axpy(eps, edge_flux_source(gam, m.e));

  ScalarField u0e = solve_helmholtz(1.0, eps * m.kappa, rhs, tol);

  VectorField sigma = grad(u0e);
  for (int a = 0; a < g.dim; ++a)
    for (int k = 0; k < g.count(); ++k)
      sigma.comp[a][k] = m.kappa * sigma.comp[a][k] - gam[k] * m.e[a];
  return {u0e, sigma};
}

ScalarField build_w0eps(const ScalarField& theta0_eps, const ScalarField& chi0_eps,
                        const EpsFamily& fam) {
  return fam.w_of(theta0_eps, chi0_eps, /*check_band=*/true);
}

PreparedData prepare_data(const InitialData& data, const EpsFamily& fam, double tol) {
  PreparedData out;
  out.theta0_eps = smooth_theta0(data.theta0, fam.eps(), tol);
  out.chi0_eps = smooth_chi0(data.chi0, fam);
  auto [u0e, sig] = build_u0eps(data.u0, out.chi0_eps, fam, tol);
  out.u0_eps = u0e;
  out.sigma0_eps = sig;
  out.u0_prime_eps = data.u0_prime;  // taken unchanged (already discrete)
  out.w0_eps = build_w0eps(out.theta0_eps, out.chi0_eps, fam);
  return out;
}

DiscreteForcing discretize_forcing(const InitialData& data, int N, double tau) {
  DiscreteForcing f;
  f.R.reserve(N);
  f.B_omega.reserve(N);
  f.b_gamma.reserve(N);
  for (int n = 0; n < N; ++n) {
    ScalarField Rn = data.R.slab_mean(n * tau, (n + 1) * tau);
    for (double s : Rn.v)
      if (s < -1e-14) throw std::invalid_argument("discretize_forcing: negative R sample");
    f.R.push_back(std::move(Rn));
    f.B_omega.push_back(data.B_omega.at(n * tau));
    f.b_gamma.push_back(data.b_gamma.at(n * tau));
  }
  return f;
}

}  // namespace tmpf
