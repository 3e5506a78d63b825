#include "tmpf/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

namespace tmpf {

namespace fs = std::filesystem;

json RunSummary::to_json() const {
  json j;
  j["config"] = config_echo;
  j["wall_time_s"] = wall_time_s;
  j["completed"] = completed;
  j["error"] = error;
  j["tau"] = tau;
  if (std::isfinite(tau_star)) j["tau_star"] = tau_star;
  else j["tau_star"] = nullptr;
  j["tau_below_star"] = tau_below_star;
  j["theta0_floor_applied"] = floor_applied;
  j["final_norms"]["theta_l2"] = final_theta_l2;
  j["final_norms"]["chi_l2"] = final_chi_l2;
  j["final_norms"]["u_l2"] = final_u_l2;
  j["aggregates"]["min_theta"] = min_theta;
  j["aggregates"]["max_entropy"] = max_entropy;
  j["aggregates"]["max_mass_budget_residual"] = max_budget_residual;
  j["aggregates"]["max_energy_residual_rel"] = max_energy_residual_rel;
  j["aggregates"]["max_sigma_consistency"] = max_sigma_consistency;
  return j;
}

namespace {

void write_series_csv(const std::string& path, const Trajectory& traj,
                      const DiagnosticsReport& rep) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "n,t,mass_w,entropy,theta_min,energy_mech,energy_residual_rel,mass_budget_residual,"
         "w_budget_gap,newton_iterations,newton_residual,sigma_consistency,beta_chi_l2\n";
  const int levels = static_cast<int>(rep.entropy.rows.size());
  for (int n = 0; n < levels; ++n) {
    const EntropyMassRow& er = rep.entropy.rows[n];
    out << n << ',' << format_double(er.t) << ',' << format_double(er.mass_w) << ','
        << format_double(er.entropy) << ',' << format_double(er.theta_min) << ',';
    if (n >= 1 && n - 1 < static_cast<int>(rep.energy.rows.size())) {
      out << format_double(rep.energy.rows[n - 1].energy) << ','
          << format_double(rep.energy.rows[n - 1].residual_rel) << ',';
    } else {
      out << format_double(rep.energy.initial_energy) << ",0,";
    }
    out << format_double(er.budget_residual) << ',' << format_double(er.w_budget_gap) << ',';
    if (n >= 1 && n - 1 < static_cast<int>(traj.steps.size())) {
      const StepDiagnostics& sd = traj.steps[n - 1];
      out << sd.newton_iterations << ',' << format_double(sd.newton_residual) << ','
          << format_double(sd.sigma_consistency) << ',' << format_double(sd.beta_chi_l2);
    } else {
      out << "0,0,0,0";
    }
    out << '\n';
  }
}

void write_snapshots(const std::string& dir, const Trajectory& traj, int stride) {
  if (stride <= 0) return;
  char name[64];
  for (size_t n = 0; n < traj.levels.size(); n += stride) {
    std::snprintf(name, sizeof(name), "theta_%04zu.csv", n);
    write_field_csv(dir + "/" + name, traj.levels[n].theta);
    std::snprintf(name, sizeof(name), "u_%04zu.csv", n);
    write_field_csv(dir + "/" + name, traj.levels[n].u);
    std::snprintf(name, sizeof(name), "chi_%04zu.csv", n);
    write_field_csv(dir + "/" + name, traj.levels[n].chi);
  }
}

}  // namespace

RunResult run_experiment(ExperimentConfig cfg, const std::string& out_dir) {
  const auto t0 = std::chrono::steady_clock::now();
  RunResult result;
  RunSummary& sum = result.summary;
  sum.config_echo = cfg.to_json();
  sum.tau = cfg.T / cfg.N;
  sum.tau_star = cfg.model.tau_star();
  sum.tau_below_star = sum.tau < sum.tau_star;

  if (!out_dir.empty()) fs::create_directories(out_dir);
  auto finalize = [&](RunResult& r) {
    r.summary.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!out_dir.empty()) {
      std::ofstream out(out_dir + "/summary.json");
      out << r.summary.to_json().dump(2) << '\n';
    }
  };

  try {
    cfg.validate();
    InitialData initial = cfg.build_initial();
    sum.floor_applied = cfg.floor_applied;

    EpsFamily fam(cfg.model, cfg.eps);
    fam.smoothed_hessian = cfg.chi_smoothed_hessian;
    SchemeParams params = SchemeParams::make(cfg.T, cfg.N, cfg.eps, cfg.model, cfg.newton_tol,
                                             cfg.linear_tol, cfg.max_newton);
    PreparedData prepared = prepare_data(initial, fam, std::max(cfg.linear_tol, 1e-12));
    DiscreteForcing forcing = discretize_forcing(initial, cfg.N, params.tau);

    result.traj = run_scheme(prepared, forcing, params, fam,
                             cfg.store_full || cfg.diagnostics_enabled);
    sum.completed = result.traj.complete;
    sum.error = result.traj.error;

    if (result.traj.levels.size() >= 3 && result.traj.complete && cfg.diagnostics_enabled) {
      result.report = full_diagnostics(result.traj, cfg.k_max);
      result.report.energy.tolerance = 10.0 * cfg.linear_tol;  // solver-error propagation bound
    }

    const Level& last = result.traj.levels.back();
    sum.final_theta_l2 = norm(last.theta, NormKind::L2);
    sum.final_chi_l2 = norm(last.chi, NormKind::L2);
    sum.final_u_l2 = norm(last.u, NormKind::L2);
    if (!result.report.entropy.rows.empty()) {
      sum.min_theta = result.report.entropy.min_theta;
      sum.max_entropy = result.report.entropy.max_entropy;
      sum.max_budget_residual = result.report.entropy.max_budget_residual;
      sum.max_energy_residual_rel = result.report.energy.max_residual_rel;
    }
    for (const StepDiagnostics& sd : result.traj.steps)
      sum.max_sigma_consistency = std::max(sum.max_sigma_consistency, sd.sigma_consistency);

    if (!out_dir.empty() && result.traj.complete && cfg.diagnostics_enabled) {
      write_series_csv(out_dir + "/series.csv", result.traj, result.report);
      write_snapshots(out_dir, result.traj, cfg.snapshot_stride);
    }
  } catch (const ConfigError&) {
    finalize(result);
    throw;  // config failures keep their own exit code
  } catch (const std::exception& e) {
    sum.completed = false;
    sum.error = e.what();
    finalize(result);
    return result;
  }
  finalize(result);
  return result;
}

// ---------------------------------------------------------------------------
// Distances
// ---------------------------------------------------------------------------

std::vector<ScalarField> component_levels(const Trajectory& traj, Component c) {
  std::vector<ScalarField> out;
  out.reserve(traj.levels.size());
  for (const Level& lev : traj.levels)
    out.push_back(c == Component::Theta ? lev.theta : (c == Component::U ? lev.u : lev.chi));
  return out;
}

double c0_l2_distance(const std::vector<ScalarField>& a, double tau_a,
                      const std::vector<ScalarField>& b, double tau_b) {
  Interpolant<ScalarField> ha(InterpKind::PiecewiseLinear, a, tau_a);
  Interpolant<ScalarField> hb(InterpKind::PiecewiseLinear, b, tau_b);
  const double tau_f = std::min(tau_a, tau_b);
  const int n_f = static_cast<int>(std::llround(std::min(ha.T_final(), hb.T_final()) / tau_f));
  double worst = 0.0;
  for (int k = 0; k <= n_f; ++k) {
    const double t = k * tau_f;
    ScalarField d = ha.eval(t) - hb.eval(t);
    worst = std::max(worst, norm(d, NormKind::L2));
  }
  return worst;
}

namespace {

template <NormKind K>
double lq_time_distance(const std::vector<ScalarField>& a, double tau_a,
                        const std::vector<ScalarField>& b, double tau_b) {
  Interpolant<ScalarField> fa(InterpKind::ForthConstant, a, tau_a);
  Interpolant<ScalarField> fb(InterpKind::ForthConstant, b, tau_b);
  const double tau_f = std::min(tau_a, tau_b);
  const int n_f = static_cast<int>(std::llround(std::min(fa.T_final(), fb.T_final()) / tau_f));
  double acc = 0.0;
  for (int k = 1; k <= n_f; ++k) {
    const double t = (k - 0.5) * tau_f;  // both interpolants constant on the fine slab
    ScalarField d = fa.eval(t) - fb.eval(t);
    if constexpr (K == NormKind::L2) {
      const double nd = norm(d, NormKind::L2);
      acc += tau_f * nd * nd;
    } else {
      acc += tau_f * norm(d, NormKind::L1);
    }
  }
  return K == NormKind::L2 ? std::sqrt(acc) : acc;
}

}  // namespace

double l2q_distance(const std::vector<ScalarField>& a, double tau_a,
                    const std::vector<ScalarField>& b, double tau_b) {
  return lq_time_distance<NormKind::L2>(a, tau_a, b, tau_b);
}

double l1q_distance(const std::vector<ScalarField>& a, double tau_a,
                    const std::vector<ScalarField>& b, double tau_b) {
  return lq_time_distance<NormKind::L1>(a, tau_a, b, tau_b);
}

// ---------------------------------------------------------------------------
// tau refinement
// ---------------------------------------------------------------------------

TauConvergenceTable converge_tau(const ExperimentConfig& base, int levels,
                                 const std::string& out_dir) {
  if (levels < 3) throw ConfigError("converge-tau: need at least 3 levels");
  TauConvergenceTable table;

  std::vector<RunResult> runs;
  runs.reserve(levels);
  for (int l = 0; l < levels; ++l) {
    ExperimentConfig cfg = base;
    cfg.N = base.N << l;
    const std::string dir =
        out_dir.empty() ? "" : out_dir + "/run_N" + std::to_string(cfg.N);
    RunResult r = run_experiment(cfg, dir);
    if (!r.traj.complete)
      throw SolverError("converge-tau: run at N = " + std::to_string(cfg.N) +
                        " failed: " + r.summary.error);
    runs.push_back(std::move(r));
  }

  table.chi_strictly_decreasing = true;
  table.theta_strictly_decreasing = true;
  table.min_ratio_chi = HUGE_VAL;
  table.min_ratio_theta = HUGE_VAL;

  for (int l = 0; l < levels; ++l) {
    TauConvergenceRow row;
    row.N = runs[l].traj.N();
    row.tau = runs[l].traj.tau();
    row.ledger = runs[l].report.ledger;
    row.interp_residual = runs[l].report.ledger.field_interp_residual;
    row.max_entropy = runs[l].report.entropy.max_entropy;
    row.max_budget_residual = runs[l].report.entropy.max_budget_residual;
    if (l + 1 < levels) {
      const auto chi_a = component_levels(runs[l].traj, Component::Chi);
      const auto chi_b = component_levels(runs[l + 1].traj, Component::Chi);
      const auto th_a = component_levels(runs[l].traj, Component::Theta);
      const auto th_b = component_levels(runs[l + 1].traj, Component::Theta);
      const auto u_a = component_levels(runs[l].traj, Component::U);
      const auto u_b = component_levels(runs[l + 1].traj, Component::U);
      row.d_chi_C0L2 = c0_l2_distance(chi_a, runs[l].traj.tau(), chi_b, runs[l + 1].traj.tau());
      row.d_theta_L2Q = l2q_distance(th_a, runs[l].traj.tau(), th_b, runs[l + 1].traj.tau());
      row.d_u_C0L2 = c0_l2_distance(u_a, runs[l].traj.tau(), u_b, runs[l + 1].traj.tau());
    }
    table.rows.push_back(std::move(row));
  }
  for (size_t l = 1; l + 1 < table.rows.size(); ++l) {
    TauConvergenceRow& row = table.rows[l];
    const TauConvergenceRow& prev = table.rows[l - 1];
    if (!(row.d_chi_C0L2 < prev.d_chi_C0L2)) table.chi_strictly_decreasing = false;
    if (!(row.d_theta_L2Q < prev.d_theta_L2Q)) table.theta_strictly_decreasing = false;
    row.ratio_chi = prev.d_chi_C0L2 / row.d_chi_C0L2;
    row.ratio_theta = prev.d_theta_L2Q / row.d_theta_L2Q;
    row.order_chi = std::log2(row.ratio_chi);
    table.min_ratio_chi = std::min(table.min_ratio_chi, row.ratio_chi);
    table.min_ratio_theta = std::min(table.min_ratio_theta, row.ratio_theta);
  }

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ofstream out(out_dir + "/converge_tau.csv");
    out << "N,tau,d_chi_C0L2,d_theta_L2Q,d_u_C0L2,ratio_chi,ratio_theta,order_chi,"
           "interp_residual,max_entropy\n";
    for (const auto& r : table.rows)
      out << r.N << ',' << format_double(r.tau) << ',' << format_double(r.d_chi_C0L2) << ','
          << format_double(r.d_theta_L2Q) << ',' << format_double(r.d_u_C0L2) << ','
          << format_double(r.ratio_chi) << ',' << format_double(r.ratio_theta) << ','
          << format_double(r.order_chi) << ',' << format_double(r.interp_residual) << ','
          << format_double(r.max_entropy) << '\n';
  }
  return table;
}

// ---------------------------------------------------------------------------
// eps refinement
// ---------------------------------------------------------------------------

EpsConvergenceTable converge_eps(const ExperimentConfig& base, int levels,
                                 const std::string& out_dir) {
  if (levels < 3) throw ConfigError("converge-eps: need at least 3 eps levels");
  EpsConvergenceTable table;

  std::vector<RunResult> runs;
  std::vector<double> lap_chi0;
  for (int l = 0; l < levels; ++l) {
    ExperimentConfig cfg = base;
    cfg.eps = base.eps / std::pow(2.0, l);
    const std::string dir =
        out_dir.empty() ? "" : out_dir + "/run_eps" + std::to_string(l);
    RunResult r = run_experiment(cfg, dir);
    if (!r.traj.complete)
      throw SolverError("converge-eps: run at eps = " + format_double(cfg.eps) +
                        " failed: " + r.summary.error);
    // sqrt(eps) || lap chi0_eps ||
    lap_chi0.push_back(std::sqrt(cfg.eps) *
                       norm(laplacian_neumann(r.traj.levels[0].chi), NormKind::L2));
    runs.push_back(std::move(r));
  }

  table.chi_strictly_decreasing = true;
  table.u_strictly_decreasing = true;
  for (int l = 0; l < levels; ++l) {
    EpsConvergenceRow row;
    row.eps = base.eps / std::pow(2.0, l);
    row.sqrt_eps_lap_chi0 = lap_chi0[l];
    row.eps_grad_dtchi_sq = row.eps * runs[l].report.ledger.sum_grad_dtau_chi_sq;
    if (l + 1 < levels) {
      const double tau = runs[l].traj.tau();
      row.d_theta_L1Q = l1q_distance(component_levels(runs[l].traj, Component::Theta), tau,
                                     component_levels(runs[l + 1].traj, Component::Theta), tau);
      row.d_chi_C0L2 = c0_l2_distance(component_levels(runs[l].traj, Component::Chi), tau,
                                      component_levels(runs[l + 1].traj, Component::Chi), tau);
      row.d_u_C0L2 = c0_l2_distance(component_levels(runs[l].traj, Component::U), tau,
                                    component_levels(runs[l + 1].traj, Component::U), tau);
    }
    table.rows.push_back(row);
  }
  for (size_t l = 1; l + 1 < table.rows.size(); ++l) {
    if (!(table.rows[l].d_chi_C0L2 < table.rows[l - 1].d_chi_C0L2))
      table.chi_strictly_decreasing = false;
    if (!(table.rows[l].d_u_C0L2 < table.rows[l - 1].d_u_C0L2))
      table.u_strictly_decreasing = false;
  }
  const auto [mn, mx] = std::minmax_element(lap_chi0.begin(), lap_chi0.end());
  table.lap_chi0_max_over_min = (*mn > 0.0) ? *mx / *mn : HUGE_VAL;

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ofstream out(out_dir + "/converge_eps.csv");
    out << "eps,d_theta_L1Q,d_chi_C0L2,d_u_C0L2,eps_grad_dtchi_sq,sqrt_eps_lap_chi0\n";
    for (const auto& r : table.rows)
      out << format_double(r.eps) << ',' << format_double(r.d_theta_L1Q) << ','
          << format_double(r.d_chi_C0L2) << ',' << format_double(r.d_u_C0L2) << ','
          << format_double(r.eps_grad_dtchi_sq) << ',' << format_double(r.sqrt_eps_lap_chi0)
          << '\n';
  }
  return table;
}

}  // namespace tmpf
