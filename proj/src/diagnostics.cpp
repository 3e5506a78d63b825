#include "tmpf/diagnostics.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>

namespace tmpf {

std::vector<double> edge_stress(const Grid& g, const ScalarField& u, const ScalarField& gamma_chi,
                                const std::array<double, 2>& e, int axis, double kappa) {
  require_same_grid(g, u.grid, "edge_stress");
  std::vector<double> s = edge_diffs(u, axis);
  const std::vector<double> gm = edge_means(gamma_chi, axis);
  for (size_t k = 0; k < s.size(); ++k) s[k] = kappa * s[k] - gm[k] * e[axis];
  return s;
}

namespace {

ScalarField gamma_field(const EpsFamily& fam, const ScalarField& chi) {
  ScalarField out(chi.grid);
  for (int k = 0; k < out.size(); ++k) out[k] = fam.gamma(chi[k], 0);
  return out;
}

double edge_energy(const Grid& g, const std::vector<std::vector<double>>& s,
                   const std::vector<std::vector<double>>& measures) {
  double acc = 0.0;
  for (int a = 0; a < g.dim; ++a)
    for (size_t k = 0; k < s[a].size(); ++k) acc += measures[a][k] * s[a][k] * s[a][k];
  return acc;
}

}  // namespace

EnergyAudit energy_audit(const Trajectory& traj) {
  const Grid& g = traj.grid;
  const SchemeParams& p = traj.params;
  const ModelFunctions& m = traj.model;
  EpsFamily fam(m, p.eps);
  const double tau = p.tau, kappa = m.kappa;
  const int steps = static_cast<int>(traj.levels.size()) - 1;

  std::vector<std::vector<double>> measures(g.dim);
  for (int a = 0; a < g.dim; ++a) measures[a] = edge_measures(g, a);

  auto stress_of = [&](const Level& lev) {
    std::vector<std::vector<double>> s(g.dim);
    const ScalarField gam = gamma_field(fam, lev.chi);
    for (int a = 0; a < g.dim; ++a) s[a] = edge_stress(g, lev.u, gam, m.e, a, kappa);
    return s;
  };

  EnergyAudit audit;
  if (steps < 1) return audit;

  // initial energy: kappa/2 |dtau u_{-1}|^2 + 1/2 ||sigma_0||^2
  ScalarField dtau_prev(g);
  for (int k = 0; k < g.count(); ++k)
    dtau_prev[k] = (traj.levels[0].u[k] - traj.u_minus1[k]) / tau;
  std::vector<std::vector<double>> s_prev = stress_of(traj.levels[0]);
  double kinetic_prev = 0.5 * kappa * inner(dtau_prev, dtau_prev);
  double stress_prev = 0.5 * edge_energy(g, s_prev, measures);
  audit.initial_energy = kinetic_prev + stress_prev;

  double scale = std::max(audit.initial_energy, DBL_MIN);
  double prev_energy = audit.initial_energy;

  for (int n = 0; n < steps; ++n) {
    const Level& lo = traj.levels[n];
    const Level& hi = traj.levels[n + 1];
    EnergyAuditRow row;
    row.n = n;

    ScalarField dtau_u(g);
    for (int k = 0; k < g.count(); ++k) dtau_u[k] = (hi.u[k] - lo.u[k]) / tau;
    std::vector<std::vector<double>> s_new = stress_of(hi);

    const double kinetic = 0.5 * kappa * inner(dtau_u, dtau_u);
    const double stress = 0.5 * edge_energy(g, s_new, measures);
    row.energy = kinetic + stress;

    // dissipation: kappa/2 |dtau u_n - dtau u_{n-1}|^2 + 1/2 ||s_{n+1} - s_n||^2
    double diss = 0.0;
    {
      ScalarField d = dtau_u;
      d -= dtau_prev;
      diss += 0.5 * kappa * inner(d, d);
      for (int a = 0; a < g.dim; ++a)
        for (size_t k = 0; k < s_new[a].size(); ++k) {
          const double e = s_new[a][k] - s_prev[a][k];
          diss += 0.5 * measures[a][k] * e * e;
        }
    }
    row.dissipation = diss;

    // gamma work: tau * sum_edges measure * s_{n+1} . e * dtau(mean gamma)
    const ScalarField gam_lo = gamma_field(fam, lo.chi);
    const ScalarField gam_hi = gamma_field(fam, hi.chi);
    double gwork = 0.0;
    for (int a = 0; a < g.dim; ++a) {
      if (m.e[a] == 0.0) continue;
      const std::vector<double> glo = edge_means(gam_lo, a);
      const std::vector<double> ghi = edge_means(gam_hi, a);
      for (size_t k = 0; k < s_new[a].size(); ++k)
        gwork += measures[a][k] * s_new[a][k] * m.e[a] * (ghi[k] - glo[k]) / tau;
    }
    row.gamma_work = tau * gwork;

    // load work
    row.load_work = tau * (kappa * inner(traj.B_omega[n], dtau_u) +
                           kappa * boundary_pairing(traj.b_gamma[n], dtau_u));

    row.residual = (row.energy - prev_energy) + row.dissipation + row.gamma_work - row.load_work;
    audit.rows.push_back(row);

    scale = std::max({scale, row.energy, std::abs(row.load_work), std::abs(row.gamma_work)});
    prev_energy = row.energy;
    dtau_prev = dtau_u;
    s_prev = std::move(s_new);
  }

  for (auto& row : audit.rows) {
    row.residual_rel = std::abs(row.residual) / scale;
    audit.max_residual_rel = std::max(audit.max_residual_rel, row.residual_rel);
  }
  double prev = audit.initial_energy;
  for (const auto& row : audit.rows) {
    if (row.energy > prev + 1e-12 * scale + std::abs(row.gamma_work) + std::abs(row.load_work))
      audit.nonincreasing = false;
    prev = row.energy;
  }
  return audit;
}

EntropyMassSeries entropy_mass_positivity(const Trajectory& traj) {
  const Grid& g = traj.grid;
  const SchemeParams& p = traj.params;
  EpsFamily fam(traj.model, p.eps);
  const double tau = p.tau, eps = p.eps;
  const int levels = static_cast<int>(traj.levels.size());

  EntropyMassSeries out;
  out.min_theta = HUGE_VAL;
  double w_accum = 0.0;  // running w-form budget (testprimabis analog)
  double mass0 = 0.0;

  for (int n = 0; n < levels; ++n) {
    const Level& lev = traj.levels[n];
    EntropyMassRow row;
    row.n = n;
    row.t = n * tau;

    const ScalarField w = fam.w_of(lev.theta, lev.chi);
    row.mass_w = integral(w);
    if (n == 0) mass0 = row.mass_w;

    double ent = 0.0;
    int floored = 0;
    double thmin = HUGE_VAL;
    for (int i = 0; i < g.nodes[0]; ++i)
      for (int j = 0; j < g.nodes[1]; ++j) {
        const int k = g.idx(i, j);
        double arg = lev.theta[k] + eps;
        if (arg <= 0.0) {
          arg = DBL_MIN;
          ++floored;
        }
        ent -= g.weight(i, j) * std::log(arg);
        thmin = std::min(thmin, lev.theta[k]);
      }
    row.entropy = ent;
    row.floored_nodes = floored;
    row.theta_min = thmin;

    if (n > 0) {
      const Level& prev = traj.levels[n - 1];
      // exact v=1 budget on the discrete theta equation for step n-1 -> n
      double budget = 0.0;
      double w_incr = 0.0;
      for (int i = 0; i < g.nodes[0]; ++i)
        for (int j = 0; j < g.nodes[1]; ++j) {
          const int k = g.idx(i, j);
          const double th = prev.theta[k], ch = prev.chi[k];
          const double an = fam.parabolic_coeff_unchecked(th, ch);
          const double dchi = (lev.chi[k] - ch) / tau;
          const double dth = (lev.theta[k] - th) / tau;
          const double pump = (th + eps) * fam.alpha(th, 1) * fam.G(ch, 1) * dchi;
          const double Rn = traj.R[n - 1][k];
          budget += g.weight(i, j) * (an * dth - pump - Rn - dchi * dchi);
          const double dG = (fam.G(lev.chi[k], 0) - fam.G(ch, 0)) / tau;
          w_incr += g.weight(i, j) * (fam.alpha(th, 0) * dG + Rn + dchi * dchi);
        }
      row.budget_residual = std::abs(budget);
      w_accum += tau * w_incr;
      row.w_budget_gap = row.mass_w - (mass0 + w_accum);
      out.max_budget_residual = std::max(out.max_budget_residual, row.budget_residual);
    }

    out.max_entropy = (n == 0) ? row.entropy : std::max(out.max_entropy, row.entropy);
    out.min_theta = std::min(out.min_theta, row.theta_min);
    out.rows.push_back(row);
  }
  out.positivity_violated = out.min_theta < 0.0;
  return out;
}

double truncation_Tk(double r, int k) {
  if (r <= k) return 0.0;
  const double d = r - k;
  if (d <= 1.0) return 0.5 * d * d;
  return d - 0.5;
}

LevelSetTable level_set_energies(const Trajectory& traj, int k_max) {
  const Grid& g = traj.grid;
  EpsFamily fam(traj.model, traj.params.eps);
  const double tau = traj.params.tau;
  const int levels = static_cast<int>(traj.levels.size());

  LevelSetTable table;
  table.rows.resize(k_max + 1);
  for (int k = 0; k <= k_max; ++k) table.rows[k].k = k;

  ScalarField w_first, w_last;
  for (int n = 0; n < levels; ++n) {
    const ScalarField w = fam.w_of(traj.levels[n].theta, traj.levels[n].chi);
    if (n == 0) w_first = w;
    if (n == levels - 1) w_last = w;
    if (n == 0) continue;  // forth-constant convention: levels 1..N carry the slabs
    const VectorField gw = grad(w);
    for (int i = 0; i < g.nodes[0]; ++i)
      for (int j = 0; j < g.nodes[1]; ++j) {
        const int kk = g.idx(i, j);
        const double wv = w[kk];
        double g2 = 0.0;
        for (int a = 0; a < g.dim; ++a) g2 += gw.comp[a][kk] * gw.comp[a][kk];
        const double mass = tau * g.weight(i, j);
        if (wv < 0.0 || wv >= k_max + 1.0) {
          table.uncovered_measure += mass;
          continue;
        }
        const int bucket = std::min(static_cast<int>(std::floor(wv)), k_max);
        table.rows[bucket].measure += mass;
        table.rows[bucket].grad_energy += mass * g2;
      }
  }
  for (int k = 0; k <= k_max; ++k) {
    double gain = 0.0;
    for (int i = 0; i < g.nodes[0]; ++i)
      for (int j = 0; j < g.nodes[1]; ++j) {
        const int kk = g.idx(i, j);
        gain += g.weight(i, j) * (truncation_Tk(w_last[kk], k) - truncation_Tk(w_first[kk], k));
      }
    table.rows[k].Tk_gain = gain;
    table.max_grad_energy = std::max(table.max_grad_energy, table.rows[k].grad_energy);
  }
  return table;
}

AprioriLedger apriori_ledger(const Trajectory& traj) {
  const Grid& g = traj.grid;
  const SchemeParams& p = traj.params;
  EpsFamily fam(traj.model, p.eps);
  const ModelFunctions& m = traj.model;
  const double tau = p.tau, eps = p.eps;
  const int N = static_cast<int>(traj.levels.size()) - 1;

  AprioriLedger led;

  auto V_norm = [](const ScalarField& f) {
    const double l2 = norm(f, NormKind::L2);
    const double h1 = norm(f, NormKind::H1semi);
    return std::sqrt(l2 * l2 + h1 * h1);
  };

  std::vector<ScalarField> dchi(N, ScalarField(g));
  for (int n = 0; n < N; ++n) {
    const Level& lo = traj.levels[n];
    const Level& hi = traj.levels[n + 1];

    ScalarField du(g), dth(g);
    for (int k = 0; k < g.count(); ++k) {
      du[k] = (hi.u[k] - lo.u[k]) / tau;
      dth[k] = (hi.theta[k] - lo.theta[k]) / tau;
      dchi[n][k] = (hi.chi[k] - lo.chi[k]) / tau;
    }
    led.max_dtau_u = std::max(led.max_dtau_u, norm(du, NormKind::L2));
    led.max_sigma = std::max(led.max_sigma, norm_l2(hi.sigma));
    led.max_chi_V = std::max(led.max_chi_V, V_norm(hi.chi));
    led.sum_dtau_chi_sq += tau * inner(dchi[n], dchi[n]);
    const double gd = norm(dchi[n], NormKind::H1semi);
    led.sum_grad_dtau_chi_sq += tau * gd * gd;
    led.sum_dtau_theta_sq += tau * inner(dth, dth);
    led.max_theta_V = std::max(led.max_theta_V, V_norm(hi.theta));
  }

  for (int mdx = 0; mdx + 1 < N; ++mdx) {
    const Level& a = traj.levels[mdx];
    const Level& b = traj.levels[mdx + 1];
    const Level& c = traj.levels[mdx + 2];
    ScalarField d2u(g);
    for (int k = 0; k < g.count(); ++k)
      d2u[k] = (c.u[k] - 2.0 * b.u[k] + a.u[k]) / (tau * tau);
    led.max_dtau2_u = std::max(led.max_dtau2_u, norm(d2u, NormKind::L2));

    double ds = 0.0;
    for (int ax = 0; ax < g.dim; ++ax)
      for (int i = 0; i < g.nodes[0]; ++i)
        for (int j = 0; j < g.nodes[1]; ++j) {
          const int k = g.idx(i, j);
          const double dd = (c.sigma.comp[ax][k] - b.sigma.comp[ax][k]) / tau;
          ds += g.weight(i, j) * dd * dd;
        }
    led.max_dtau_sigma = std::max(led.max_dtau_sigma, std::sqrt(ds));

    ScalarField d2chi = dchi[mdx + 1];
    d2chi -= dchi[mdx];
    d2chi *= 1.0 / tau;
    led.sum_dtau2_chi_V_sq += tau * V_norm(d2chi) * V_norm(d2chi);
    led.max_grad_dtau_chi = std::max(led.max_grad_dtau_chi, norm(dchi[mdx + 1], NormKind::H1semi));
  }

  // Lq surrogates over Q (forth-constant in time), q in {1, 1.2}
  const double qs[2] = {1.0, 1.2};
  for (int qi = 0; qi < 2; ++qi) {
    const double q = qs[qi];
    double wq = 0.0, wgq = 0.0, tq = 0.0, tgq = 0.0;
    for (int n = 1; n <= N; ++n) {
      const Level& lev = traj.levels[n];
      const ScalarField w = fam.w_of(lev.theta, lev.chi);
      const double nw = norm(w, NormKind::Lq, q);
      const double ngw = norm(w, NormKind::W1qsemi, q);
      const double nt = norm(lev.theta, NormKind::Lq, q);
      const double ngt = norm(lev.theta, NormKind::W1qsemi, q);
      wq += tau * std::pow(nw, q);
      wgq += tau * std::pow(ngw, q);
      tq += tau * std::pow(nt, q);
      tgq += tau * std::pow(ngt, q);
    }
    led.w_Lq[qi] = std::pow(wq, 1.0 / q);
    led.w_W1q[qi] = std::pow(wgq, 1.0 / q);
    led.theta_Lq[qi] = std::pow(tq, 1.0 / q);
    led.theta_W1q[qi] = std::pow(tgq, 1.0 / q);
  }

  // recursion chain: z_n = chi_n - eps lap chi_n, f_n from the chi equation
  {
    std::vector<double> z_sq(N + 1);
    std::vector<ScalarField> zs(N + 1, ScalarField(g));
    for (int n = 0; n <= N; ++n) {
      const ScalarField lap = laplacian_neumann(traj.levels[n].chi);
      for (int k = 0; k < g.count(); ++k) zs[n][k] = traj.levels[n].chi[k] - eps * lap[k];
      z_sq[n] = inner(zs[n], zs[n]);
    }
    double fsum = 0.0, zsum = 0.0;
    double worst = -HUGE_VAL;
    for (int n = 0; n < N; ++n) {
      const Level& lo = traj.levels[n];
      const Level& hi = traj.levels[n + 1];
      ScalarField sig_e = lo.sigma.dot(m.e);
      ScalarField fn(g);
      for (int k = 0; k < g.count(); ++k)
        fn[k] = hi.chi[k] / eps - m.theta_c * fam.F_eps_prime(hi.chi[k]) -
                fam.alpha(lo.theta[k], 0) * fam.G(lo.chi[k], 1) +
                sig_e[k] * fam.gamma(lo.chi[k], 1);
      fsum += tau * inner(fn, fn);
      zsum += tau * z_sq[n + 1];
      const double lhs = zsum / eps + z_sq[n + 1];
      const double rhs = z_sq[0] + eps * fsum;
      worst = std::max(worst, lhs - rhs);
    }
    led.tecnico_worst_margin = worst;
    const double scale = std::max(1.0, z_sq[0] + eps * fsum);
    led.tecnico_ok = worst <= 1e-7 * scale;
  }

  // difference-quotient inequalities on the trajectory
  {
    double lip_worst = -HUGE_VAL, conv_worst = -HUGE_VAL;
    for (int n = 0; n < N; ++n) {
      const Level& lo = traj.levels[n];
      const Level& hi = traj.levels[n + 1];
      for (int k = 0; k < g.count(); ++k) {
        const double dc = (hi.chi[k] - lo.chi[k]) / tau;
        const double dG = (fam.G(hi.chi[k], 0) - fam.G(lo.chi[k], 0)) / tau;
        lip_worst = std::max(lip_worst, std::abs(dG) - m.G.sup_Gp * std::abs(dc));
        const double dF1 = (fam.F1eps(hi.chi[k]) - fam.F1eps(lo.chi[k])) / tau;
        conv_worst = std::max(conv_worst, dF1 - fam.beta(hi.chi[k]) * dc);
      }
    }
    led.lipschitz_worst = lip_worst;
    led.convexity_worst = conv_worst;
  }

  // cross-check tau sum ||dtau chi||^2 against the time integral of the
  // evaluated hat-interpolant derivative (back-constant of the deltas)
  {
    std::vector<ScalarField> chi_levels;
    chi_levels.reserve(N + 1);
    for (const Level& lev : traj.levels) chi_levels.push_back(lev.chi);
    Interpolant<ScalarField> hat(InterpKind::PiecewiseLinear, chi_levels, tau);
    const double x3 = 0.774596669241483377036;
    double acc = 0.0;
    for (int n = 1; n <= N; ++n) {
      const double t0 = (n - 1) * tau;
      // slope of the affine slab recovered from eval() at two interior points
      const double ta = t0 + 0.25 * tau, tb = t0 + 0.75 * tau;
      ScalarField d = (1.0 / (tb - ta)) * (hat.eval(tb) + (-1.0) * hat.eval(ta));
      acc += tau * inner(d, d);
    }
    const double alg = led.sum_dtau_chi_sq;
    led.dtchi_crosscheck_residual =
        std::abs(acc - alg) / std::max({std::abs(acc), std::abs(alg), 1e-300});

    // field-valued interpolant identity: ||forth - hat||^2 = (tau^2/3)||dt hat||^2
    Interpolant<ScalarField> forth(InterpKind::ForthConstant, chi_levels, tau);
    double lhs = 0.0;
    for (int n = 1; n <= N; ++n) {
      const double mid = (n - 0.5) * tau, half = 0.5 * tau;
      const double ts[3] = {mid - half * x3, mid, mid + half * x3};
      const double ws[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
      for (int q = 0; q < 3; ++q) {
        ScalarField d = forth.eval(ts[q]) - hat.eval(ts[q]);
        lhs += half * ws[q] * inner(d, d);
      }
    }
    const double rhs = tau * tau / 3.0 * alg;
    led.field_interp_residual = std::abs(lhs - rhs) / std::max({lhs, rhs, 1e-300});
  }

  return led;
}

DiagnosticsReport full_diagnostics(const Trajectory& traj, int k_max) {
  if (traj.levels.size() != traj.steps.size() + 1)
    throw std::invalid_argument("full_diagnostics: needs a fully stored trajectory");
  DiagnosticsReport rep;
  rep.energy = energy_audit(traj);
  rep.entropy = entropy_mass_positivity(traj);
  rep.level_sets = level_set_energies(traj, k_max);
  rep.ledger = apriori_ledger(traj);
  return rep;
}

}  // namespace tmpf
