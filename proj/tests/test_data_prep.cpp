#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "tmpf/data_prep.hpp"

using namespace tmpf;

namespace {
constexpr double kPi = 3.14159265358979323846;

ScalarField cosine_field(const Grid& g, double offset, double amp) {
  ScalarField f(g);
  for (int i = 0; i < g.nodes[0]; ++i) f[i] = offset + amp * std::cos(kPi * g.coord(0, i));
  return f;
}
}  // namespace

TEST_CASE("smooth_theta0: constants invariant, mass conserved, entropy inequality") {
  const Grid g = Grid::line(1.0, 65);
  const double eps = 0.1;

  const ScalarField c(g, 1.7);
  const ScalarField ce = smooth_theta0(c, eps);
  for (double v : ce.v) CHECK(v == doctest::Approx(1.7).epsilon(1e-11));

  const ScalarField th0 = cosine_field(g, 1.0, 0.8);
  const ScalarField the = smooth_theta0(th0, eps);
  CHECK(integral(the) == doctest::Approx(integral(th0)).epsilon(1e-10));
  for (double v : the.v) CHECK(v >= -1e-10);  // discrete maximum principle

  // -int ln(theta_eps + eps) <= -int ln(theta0 + eps)
  double le = 0.0, l0 = 0.0;
  for (int i = 0; i < g.count(); ++i) {
    le -= g.weight(i) * std::log(the[i] + eps);
    l0 -= g.weight(i) * std::log(th0[i] + eps);
  }
  CHECK(le <= l0 + 1e-8);
}

TEST_CASE("smooth_chi0: constants fixed, interior exact, ellipticity inequality") {
  const Grid g = Grid::line(1.0, 65);
  ModelFunctions m = ModelFunctions::preset("default");
  EpsFamily fam(m, 0.1);

  const ScalarField z(g, 0.0);
  const ScalarField ze = smooth_chi0(z, fam);
  for (double v : ze.v) CHECK(std::abs(v) <= 1e-10);

  const ScalarField c(g, 0.42);  // interior constant: beta_eps = 0, exact fixed point
  const ScalarField cs = smooth_chi0(c, fam);
  for (double v : cs.v) CHECK(v == doctest::Approx(0.42).epsilon(1e-10));

  // energy inequality of the construction
  const ScalarField chi0 = cosine_field(g, 0.0, 0.9);
  const ScalarField chie = smooth_chi0(chi0, fam);
  const double eps = fam.eps();
  auto energy = [&](const ScalarField& f) {
    double fe = 0.0;
    for (int i = 0; i < g.count(); ++i) fe += g.weight(i) * fam.F1eps(f[i]);
    const double gn = norm(f, NormKind::H1semi);
    return 0.5 * gn * gn + fe;
  };
  ScalarField diff = chie;
  diff -= chi0;
  const double lhs = inner(diff, diff) + eps * energy(chie);
  const double rhs = eps * energy(chi0);
  CHECK(lhs <= rhs + 1e-8);
}

TEST_CASE("build_u0eps: decoupled constants, convergence, stress energy bound") {
  const Grid g = Grid::line(1.0, 65);
  {
    ModelFunctions md = ModelFunctions::preset("decoupled");
    EpsFamily fam(md, 0.1);
    const ScalarField u0(g, 0.8), chi(g, 0.5);
    const auto [ue, se] = build_u0eps(u0, chi, fam);
    for (double v : ue.v) CHECK(v == doctest::Approx(0.8).epsilon(1e-11));
    for (double v : se.comp[0]) CHECK(std::abs(v) <= 1e-9);
  }

  ModelFunctions m = ModelFunctions::preset("default");
  const ScalarField u0 = cosine_field(g, 0.0, 1.0);
  const ScalarField chi0 = cosine_field(g, 0.0, 0.5);

  double prev = HUGE_VAL;
  for (double eps : {0.1, 0.05, 0.025}) {
    EpsFamily fam(m, eps);
    const ScalarField chie = smooth_chi0(chi0, fam);
    const auto [ue, se] = build_u0eps(u0, chie, fam);
    ScalarField d = ue;
    d -= u0;
    const double err = norm(d, NormKind::L2);
    CHECK(err < prev);
    prev = err;

    // (kappa/eps) ||u0e - u0||^2 + 1/2 ||s0e||^2 <= 1/2 || s0 - (gamma_eps(chi0e) - gamma(chi0)) e ||^2
    // with the edge-based stress quadrature of the construction
    double lhs = m.kappa / eps * inner(d, d);
    double rhs = 0.0;
    const auto meas = edge_measures(g, 0);
    ScalarField game(g), gam0(g);
    for (int i = 0; i < g.count(); ++i) {
      game[i] = fam.gamma(chie[i], 0);
      gam0[i] = m.gamma(chi0[i]);
    }
    const auto du_e = edge_diffs(ue, 0);
    const auto du_0 = edge_diffs(u0, 0);
    const auto ge_m = edge_means(game, 0);
    const auto g0_m = edge_means(gam0, 0);
    for (size_t k = 0; k < meas.size(); ++k) {
      const double s_new = m.kappa * du_e[k] - ge_m[k] * m.e[0];
      const double s_cmp = m.kappa * du_0[k] - g0_m[k] * m.e[0] - (ge_m[k] - g0_m[k]) * m.e[0];
      lhs += 0.5 * meas[k] * s_new * s_new;
      rhs += 0.5 * meas[k] * s_cmp * s_cmp;
    }
    CHECK(lhs <= rhs + 1e-8);
  }
}

TEST_CASE("build_w0eps: decoupled and zero-temperature cases, band on default") {
  const Grid g = Grid::line(1.0, 33);
  {
    ModelFunctions md = ModelFunctions::preset("decoupled");
    EpsFamily fam(md, 0.1);
    ScalarField th(g);
    for (int i = 0; i < g.count(); ++i) th[i] = 0.2 + 0.1 * i;
    const ScalarField w = build_w0eps(th, ScalarField(g, 0.3), fam);
    for (int i = 0; i < g.count(); ++i) CHECK(w[i] == doctest::Approx(md.c0 * th[i]));

    const ScalarField wz = build_w0eps(ScalarField(g, 0.0), ScalarField(g, 0.3), fam);
    for (double v : wz.v) CHECK(v == 0.0);
  }
  {
    ModelFunctions m = ModelFunctions::preset("default");
    EpsFamily fam(m, 0.1);
    const ScalarField th = cosine_field(g, 1.0, 0.2);
    const ScalarField chi = cosine_field(g, 0.0, 0.5);
    const ScalarField w = build_w0eps(th, chi, fam);  // throws on band violation
    for (int i = 0; i < g.count(); ++i) {
      CHECK(w[i] >= fam.lambda_star() * th[i] - 1e-10);
      CHECK(w[i] <= fam.C_star() * th[i] + 1e-10);
    }
  }
}

TEST_CASE("discretize_forcing: slab averages and samples") {
  const Grid g = Grid::line(1.0, 9);
  InitialData d;
  d.theta0 = ScalarField(g, 1.0);
  d.u0 = ScalarField(g, 0.0);
  d.u0_prime = ScalarField(g, 0.0);
  d.chi0 = ScalarField(g, 0.0);
  d.B_omega = {ScalarField(g, 0.0), {}};
  d.b_gamma = {BoundaryValues::constant(g, 0.0), {}};

  // time-constant R: R_n = R for all n
  d.R = {ScalarField(g, 0.37), {}};
  DiscreteForcing f = discretize_forcing(d, 4, 0.25);
  CHECK(f.R.size() == 4);
  for (const auto& Rn : f.R)
    for (double v : Rn.v) CHECK(v == doctest::Approx(0.37).epsilon(1e-14));

  // R(t) = t with tau = 1: R_0 = 1/2 (exact slab average)
  d.R = {ScalarField(g, 1.0), {TimeProfile::Kind::Linear}};
  DiscreteForcing f2 = discretize_forcing(d, 2, 1.0);
  for (double v : f2.R[0].v) CHECK(v == doctest::Approx(0.5).epsilon(1e-14));
  for (double v : f2.R[1].v) CHECK(v == doctest::Approx(1.5).epsilon(1e-14));

  // B == 0: all pairings vanish
  const ScalarField one(g, 1.0);
  for (int n = 0; n < 2; ++n) {
    CHECK(integral(f2.B_omega[n]) == 0.0);
    CHECK(boundary_pairing(f2.b_gamma[n], one) == 0.0);
  }

  // negative R sample is refused
  d.R = {ScalarField(g, -0.1), {}};
  CHECK_THROWS_AS(discretize_forcing(d, 2, 0.5), std::invalid_argument);
}

TEST_CASE("prepared data converges to its targets as eps halves") {
  const Grid g = Grid::line(1.0, 65);
  ModelFunctions m = ModelFunctions::preset("default");

  InitialData d;
  d.theta0 = cosine_field(g, 1.0, 0.2);
  d.u0 = cosine_field(g, 0.0, 0.3);
  d.u0_prime = ScalarField(g, 0.0);
  d.chi0 = cosine_field(g, 0.0, 0.5);
  d.R = {ScalarField(g, 0.1), {}};
  d.B_omega = {ScalarField(g, 0.0), {}};
  d.b_gamma = {BoundaryValues::constant(g, 0.0), {}};
  d.validate(m, 1.0);

  double prev_th = HUGE_VAL, prev_chi = HUGE_VAL, prev_u = HUGE_VAL, prev_w = HUGE_VAL;
  std::vector<double> lap_ratio;
  for (double eps : {0.2, 0.1, 0.05}) {
    EpsFamily fam(m, eps);
    const PreparedData p = prepare_data(d, fam);

    auto dist = [](const ScalarField& a, const ScalarField& b) {
      ScalarField t = a;
      t -= b;
      return norm(t, NormKind::L2);
    };
    const double dth = dist(p.theta0_eps, d.theta0);
    const double dchi = dist(p.chi0_eps, d.chi0);
    const double du = dist(p.u0_eps, d.u0);
    const ScalarField w0 = fam.w_of(d.theta0, d.chi0);  // unsmoothed target value
    const double dw = dist(p.w0_eps, w0);
    CHECK(dth < prev_th);
    CHECK(dchi < prev_chi);
    CHECK(du < prev_u);
    CHECK(dw < prev_w);
    prev_th = dth;
    prev_chi = dchi;
    prev_u = du;
    prev_w = dw;

    // sqrt(eps) ||lap chi0_eps|| bounded across the ladder
    lap_ratio.push_back(std::sqrt(eps) * norm(laplacian_neumann(p.chi0_eps), NormKind::L2));

    // int F1_eps(chi0_eps) <= int F1(chi0) + tol (here F1(chi0) = 0 inside [-1,1])
    double fe = 0.0;
    for (int i = 0; i < g.count(); ++i) fe += g.weight(i) * fam.F1eps(p.chi0_eps[i]);
    CHECK(fe <= 1e-8);

    // w0_eps >= lambda* theta0_eps
    for (int i = 0; i < g.count(); ++i)
      CHECK(p.w0_eps[i] >= fam.lambda_star() * p.theta0_eps[i] - 1e-10);
  }
  const double mx = *std::max_element(lap_ratio.begin(), lap_ratio.end());
  const double mn = *std::min_element(lap_ratio.begin(), lap_ratio.end());
  CHECK(mx / mn <= 2.0);
}
