#include "tmpf/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace tmpf {

namespace {

constexpr double kPi = 3.14159265358979323846;

const json& need(const json& j, const std::string& key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError("missing config key: " + where + "." + key);
  return *it;
}

double need_num(const json& j, const std::string& key, const std::string& where) {
  const json& v = need(j, key, where);
  if (!v.is_number()) throw ConfigError("config key is not a number: " + where + "." + key);
  return v.get<double>();
}

TimeProfile time_from_json(const json& j, const std::string& where) {
  TimeProfile p;
  if (j.is_null()) return p;
  const std::string kind = need(j, "kind", where).get<std::string>();
  if (kind == "constant") p.kind = TimeProfile::Kind::Constant;
  else if (kind == "linear") p.kind = TimeProfile::Kind::Linear;
  else if (kind == "sine") {
    p.kind = TimeProfile::Kind::Sine;
    p.omega = need_num(j, "omega", where);
    p.phase = j.value("phase", 0.0);
  } else
    throw ConfigError("unknown time profile kind at " + where + ": " + kind);
  return p;
}

json time_to_json(const TimeProfile& p) {
  json j;
  switch (p.kind) {
    case TimeProfile::Kind::Constant: j["kind"] = "constant"; break;
    case TimeProfile::Kind::Linear: j["kind"] = "linear"; break;
    case TimeProfile::Kind::Sine:
      j["kind"] = "sine";
      j["omega"] = p.omega;
      j["phase"] = p.phase;
      break;
  }
  return j;
}

struct TabJson {
  double x0 = 0.0, dx = 0.0;
  std::vector<double> values;
};

TabJson tab_from_json(const json& j, const std::string& where) {
  TabJson t;
  t.x0 = need_num(j, "x0", where);
  t.dx = need_num(j, "dx", where);
  for (const json& v : need(j, "values", where)) t.values.push_back(v.get<double>());
  return t;
}

}  // namespace

// ---------------------------------------------------------------------------
// FieldSpec
// ---------------------------------------------------------------------------

FieldSpec FieldSpec::constant(double v) {
  FieldSpec f;
  f.kind = Kind::Constant;
  f.value = v;
  return f;
}

FieldSpec FieldSpec::cosine(double offset, double amplitude, double freq) {
  FieldSpec f;
  f.kind = Kind::Cosine;
  f.offset = offset;
  f.amplitude = amplitude;
  f.freq = freq;
  return f;
}

FieldSpec FieldSpec::linear(double offset, double slope) {
  FieldSpec f;
  f.kind = Kind::Linear;
  f.offset = offset;
  f.slope = slope;
  return f;
}

ScalarField FieldSpec::build(const Grid& g) const {
  ScalarField f(g);
  switch (kind) {
    case Kind::Constant:
      for (double& t : f.v) t = value;
      return f;
    case Kind::Cosine:
      for (int i = 0; i < g.nodes[0]; ++i)
        for (int j = 0; j < g.nodes[1]; ++j) {
          double prod = std::cos(freq * kPi * g.coord(0, i) / g.extent[0]);
          if (g.dim == 2) prod *= std::cos(freq * kPi * g.coord(1, j) / g.extent[1]);
          f[g.idx(i, j)] = offset + amplitude * prod;
        }
      return f;
    case Kind::Gaussian:
      for (int i = 0; i < g.nodes[0]; ++i)
        for (int j = 0; j < g.nodes[1]; ++j) {
          double r2 = 0.0;
          const double dx = (g.coord(0, i) - center * g.extent[0]) / (width * g.extent[0]);
          r2 += dx * dx;
          if (g.dim == 2) {
            const double dy = (g.coord(1, j) - center * g.extent[1]) / (width * g.extent[1]);
            r2 += dy * dy;
          }
          f[g.idx(i, j)] = offset + amplitude * std::exp(-r2);
        }
      return f;
    case Kind::Linear:
      for (int i = 0; i < g.nodes[0]; ++i)
        for (int j = 0; j < g.nodes[1]; ++j) f[g.idx(i, j)] = offset + slope * g.coord(0, i);
      return f;
    case Kind::Csv:
      return read_field_csv(csv_path, g);
  }
  throw std::logic_error("FieldSpec: unknown kind");
}

json FieldSpec::to_json() const {
  json j;
  switch (kind) {
    case Kind::Constant:
      j["constant"] = value;
      break;
    case Kind::Cosine:
      j["kind"] = "cosine";
      j["offset"] = offset;
      j["amplitude"] = amplitude;
      j["freq"] = freq;
      break;
    case Kind::Gaussian:
      j["kind"] = "gaussian";
      j["offset"] = offset;
      j["amplitude"] = amplitude;
      j["center"] = center;
      j["width"] = width;
      break;
    case Kind::Linear:
      j["kind"] = "linear";
      j["offset"] = offset;
      j["slope"] = slope;
      break;
    case Kind::Csv:
      j["csv"] = csv_path;
      break;
  }
  return j;
}

FieldSpec FieldSpec::from_json(const json& j, const std::string& where) {
  FieldSpec f;
  if (j.contains("constant")) {
    f.kind = Kind::Constant;
    f.value = j["constant"].get<double>();
    return f;
  }
  if (j.contains("csv")) {
    f.kind = Kind::Csv;
    f.csv_path = j["csv"].get<std::string>();
    return f;
  }
  const std::string kind = need(j, "kind", where).get<std::string>();
  if (kind == "cosine") {
    f.kind = Kind::Cosine;
    f.offset = j.value("offset", 0.0);
    f.amplitude = need_num(j, "amplitude", where);
    f.freq = j.value("freq", 1.0);
  } else if (kind == "gaussian") {
    f.kind = Kind::Gaussian;
    f.offset = j.value("offset", 0.0);
    f.amplitude = need_num(j, "amplitude", where);
    f.center = j.value("center", 0.5);
    f.width = j.value("width", 0.1);
  } else if (kind == "linear") {
    f.kind = Kind::Linear;
    f.offset = j.value("offset", 0.0);
    f.slope = need_num(j, "slope", where);
  } else {
    throw ConfigError("unknown field kind at " + where + ": " + kind);
  }
  return f;
}

// ---------------------------------------------------------------------------
// BoundarySpec
// ---------------------------------------------------------------------------

BoundaryForcing BoundarySpec::build(const Grid& g) const {
  BoundaryForcing b;
  b.time = time;
  b.space = use_ends ? BoundaryValues::ends(g, left, right) : BoundaryValues::constant(g, value);
  return b;
}

json BoundarySpec::to_json() const {
  json j;
  if (use_ends) {
    j["left"] = left;
    j["right"] = right;
  } else {
    j["constant"] = value;
  }
  j["time"] = time_to_json(time);
  return j;
}

BoundarySpec BoundarySpec::from_json(const json& j, const std::string& where) {
  BoundarySpec b;
  if (j.contains("left") || j.contains("right")) {
    b.use_ends = true;
    b.left = need_num(j, "left", where);
    b.right = need_num(j, "right", where);
  } else {
    b.value = need_num(j, "constant", where);
  }
  if (j.contains("time")) b.time = time_from_json(j["time"], where + ".time");
  return b;
}

// ---------------------------------------------------------------------------
// Model (de)serialization
// ---------------------------------------------------------------------------

namespace {

json alpha_to_json(const AlphaSpec& a) {
  json j;
  switch (a.kind) {
    case AlphaSpec::Kind::ExpSaturating:
      j["kind"] = "exp_saturating";
      j["A"] = a.A;
      break;
    case AlphaSpec::Kind::GaussianWell:
      j["kind"] = "gaussian_well";
      j["A"] = a.A;
      j["rho"] = a.rho;
      break;
    case AlphaSpec::Kind::Tabulated:
      j["kind"] = "tabulated";
      j["x0"] = a.tab.x_min();
      j["dx"] = a.tab.dx();
      j["values"] = a.tab.values();
      break;
  }
  return j;
}

AlphaSpec alpha_from_json(const json& j, const std::string& where) {
  AlphaSpec a;
  const std::string kind = need(j, "kind", where).get<std::string>();
  if (kind == "exp_saturating") {
    a.kind = AlphaSpec::Kind::ExpSaturating;
    a.A = need_num(j, "A", where);
  } else if (kind == "gaussian_well") {
    a.kind = AlphaSpec::Kind::GaussianWell;
    a.A = need_num(j, "A", where);
    a.rho = need_num(j, "rho", where);
  } else if (kind == "tabulated") {
    a.kind = AlphaSpec::Kind::Tabulated;
    const TabJson t = tab_from_json(j, where);
    a.tab = CubicSpline(t.x0, t.dx, t.values);
  } else {
    throw ConfigError("unknown alpha kind at " + where + ": " + kind);
  }
  return a;
}

json model_to_json(const ModelFunctions& m, const std::string& preset) {
  json j;
  j["preset"] = preset;
  j["c0"] = m.c0;
  j["kappa"] = m.kappa;
  j["theta_c"] = m.theta_c;
  j["lambda0"] = m.lambda0;
  j["e"] = std::vector<double>{m.e[0], m.e[1]};
  j["alpha"] = alpha_to_json(m.alpha);
  switch (m.F1.kind) {
    case F1Spec::Kind::Indicator: j["F1"] = {{"kind", "indicator"}}; break;
    case F1Spec::Kind::Zero: j["F1"] = {{"kind", "zero"}}; break;
    case F1Spec::Kind::TabulatedConvex:
      j["F1"] = {{"kind", "tabulated"},
                 {"x0", m.F1.tab.x_min()},
                 {"dx", m.F1.tab.dx()},
                 {"values", m.F1.tab.values()}};
      break;
  }
  switch (m.F2.kind) {
    case F2Spec::Kind::QuadraticWell: j["F2"] = {{"kind", "quadratic_well"}}; break;
    case F2Spec::Kind::QuadraticStable: j["F2"] = {{"kind", "quadratic_stable"}}; break;
    case F2Spec::Kind::Zero: j["F2"] = {{"kind", "zero"}}; break;
    case F2Spec::Kind::Tabulated:
      j["F2"] = {{"kind", "tabulated"},
                 {"x0", m.F2.tab.x_min()},
                 {"dx", m.F2.tab.dx()},
                 {"values", m.F2.tab.values()}};
      break;
  }
  j["F2"]["sup_pi_prime"] = m.F2.sup_pi_prime;
  switch (m.G.kind) {
    case GSpec::Kind::RationalSaturating: j["G"] = {{"kind", "rational_saturating"}}; break;
    case GSpec::Kind::Zero: j["G"] = {{"kind", "zero"}}; break;
    case GSpec::Kind::Tabulated:
      j["G"] = {{"kind", "tabulated"},
                {"x0", m.G.tab.x_min()},
                {"dx", m.G.tab.dx()},
                {"values", m.G.tab.values()}};
      break;
  }
  j["G"]["sup_G"] = m.G.sup_G;
  j["G"]["sup_Gp"] = m.G.sup_Gp;
  j["G"]["lip_Gp"] = m.G.lip_Gp;
  return j;
}

ModelFunctions model_from_json(const json& j) {
  ModelFunctions m = ModelFunctions::preset(j.value("preset", "default"));
  if (j.contains("c0")) m.c0 = j["c0"].get<double>();
  if (j.contains("kappa")) m.kappa = j["kappa"].get<double>();
  if (j.contains("theta_c")) m.theta_c = j["theta_c"].get<double>();
  if (j.contains("lambda0")) m.lambda0 = j["lambda0"].get<double>();
  if (j.contains("e")) {
    const auto e = j["e"].get<std::vector<double>>();
    m.e = {e[0], e.size() > 1 ? e[1] : 0.0};
    const double n = std::sqrt(m.e[0] * m.e[0] + m.e[1] * m.e[1]);
    if (std::abs(n - 1.0) > 1e-9) throw ConfigError("model.e must be a unit vector");
    m.e = {m.e[0] / n, m.e[1] / n};
  }
  if (j.contains("alpha")) m.alpha = alpha_from_json(j["alpha"], "model.alpha");
  if (j.contains("F1")) {
    const std::string kind = need(j["F1"], "kind", "model.F1").get<std::string>();
    if (kind == "indicator") m.F1.kind = F1Spec::Kind::Indicator;
    else if (kind == "zero") m.F1.kind = F1Spec::Kind::Zero;
    else if (kind == "tabulated") {
      m.F1.kind = F1Spec::Kind::TabulatedConvex;
      const TabJson t = tab_from_json(j["F1"], "model.F1");
      m.F1.tab = CubicSpline(t.x0, t.dx, t.values);
    } else
      throw ConfigError("unknown F1 kind: " + kind);
  }
  if (j.contains("F2")) {
    const std::string kind = need(j["F2"], "kind", "model.F2").get<std::string>();
    if (kind == "quadratic_well") m.F2.kind = F2Spec::Kind::QuadraticWell;
    else if (kind == "quadratic_stable") m.F2.kind = F2Spec::Kind::QuadraticStable;
    else if (kind == "zero") {
      m.F2.kind = F2Spec::Kind::Zero;
      m.F2.sup_pi_prime = 0.0;
    } else if (kind == "tabulated") {
      m.F2.kind = F2Spec::Kind::Tabulated;
      const TabJson t = tab_from_json(j["F2"], "model.F2");
      m.F2.tab = CubicSpline(t.x0, t.dx, t.values);
    } else
      throw ConfigError("unknown F2 kind: " + kind);
    if (j["F2"].contains("sup_pi_prime")) m.F2.sup_pi_prime = j["F2"]["sup_pi_prime"].get<double>();
  }
  if (j.contains("G")) {
    const std::string kind = need(j["G"], "kind", "model.G").get<std::string>();
    if (kind == "rational_saturating") m.G.kind = GSpec::Kind::RationalSaturating;
    else if (kind == "zero") {
      m.G.kind = GSpec::Kind::Zero;
      m.G.sup_G = 0.0;
      m.G.sup_Gp = 0.0;
      m.G.lip_Gp = 0.0;
    } else if (kind == "tabulated") {
      m.G.kind = GSpec::Kind::Tabulated;
      const TabJson t = tab_from_json(j["G"], "model.G");
      m.G.tab = CubicSpline(t.x0, t.dx, t.values);
    } else
      throw ConfigError("unknown G kind: " + kind);
    if (j["G"].contains("sup_G")) m.G.sup_G = j["G"]["sup_G"].get<double>();
    if (j["G"].contains("sup_Gp")) m.G.sup_Gp = j["G"]["sup_Gp"].get<double>();
    if (j["G"].contains("lip_Gp")) m.G.lip_Gp = j["G"]["lip_Gp"].get<double>();
  }
  return m;
}

}  // namespace

// ---------------------------------------------------------------------------
// ExperimentConfig
// ---------------------------------------------------------------------------

ExperimentConfig ExperimentConfig::defaults() {
  ExperimentConfig c;
  c.model = ModelFunctions::preset("default");
  c.theta0 = FieldSpec::cosine(1.0, 0.2);
  c.chi0 = FieldSpec::cosine(0.0, 0.5);
  c.u0 = FieldSpec::constant(0.0);
  c.u0_prime = FieldSpec::constant(0.0);
  c.R_space = FieldSpec::constant(0.1);
  c.B_space = FieldSpec::constant(0.0);
  return c;
}

ExperimentConfig ExperimentConfig::preset(const std::string& name) {
  if (name == "default") return defaults();
  if (name == "decoupled-wave") {
    ExperimentConfig c = defaults();
    c.model_preset = "decoupled";
    c.model = ModelFunctions::preset("decoupled");
    c.N = 400;
    c.theta0 = FieldSpec::constant(1.0);
    c.chi0 = FieldSpec::constant(0.0);
    c.u0 = FieldSpec::cosine(0.0, 1.0);
    c.R_space = FieldSpec::constant(0.0);
    c.linear_tol = 1e-13;
    return c;
  }
  if (name == "hostile") {
    ExperimentConfig c = defaults();
    c.model_preset = "hostile";
    c.model = ModelFunctions::preset("hostile");
    c.grid = Grid::line(1.0, 33);
    c.T = 9.0;
    c.N = 10;  // tau = 0.9 < tau* = 2
    c.eps = 0.02;
    c.theta0 = FieldSpec::constant(0.7);
    c.chi0 = FieldSpec::constant(0.577);
    c.u0 = FieldSpec::linear(15.0, -30.0);
    c.R_space = FieldSpec::constant(0.0);
    return c;
  }
  throw ConfigError("unknown experiment preset: " + name);
}

json ExperimentConfig::to_json() const {
  json j;
  j["grid"]["dim"] = grid.dim;
  j["grid"]["extent"] = grid.dim == 1 ? std::vector<double>{grid.extent[0]}
                                      : std::vector<double>{grid.extent[0], grid.extent[1]};
  j["grid"]["nodes"] = grid.dim == 1 ? std::vector<int>{grid.nodes[0]}
                                     : std::vector<int>{grid.nodes[0], grid.nodes[1]};
  j["time"]["T"] = T;
  j["time"]["N"] = N;
  j["eps"] = eps;
  j["model"] = model_to_json(model, model_preset);
  j["initial"]["theta0"] = theta0.to_json();
  j["initial"]["u0"] = u0.to_json();
  j["initial"]["u0_prime"] = u0_prime.to_json();
  j["initial"]["chi0"] = chi0.to_json();
  j["initial"]["theta0_floor"] = theta0_floor;
  j["forcing"]["R"]["space"] = R_space.to_json();
  j["forcing"]["R"]["time"] = time_to_json(R_time);
  j["forcing"]["B_omega"]["space"] = B_space.to_json();
  j["forcing"]["B_omega"]["time"] = time_to_json(B_time);
  j["forcing"]["b_gamma"] = b_gamma.to_json();
  j["tolerances"]["newton_tol"] = newton_tol;
  j["tolerances"]["linear_tol"] = linear_tol;
  j["tolerances"]["max_newton"] = max_newton;
  j["diagnostics"]["enabled"] = diagnostics_enabled;
  j["diagnostics"]["k_max"] = k_max;
  j["diagnostics"]["store_full"] = store_full;
  j["diagnostics"]["chi_smoothed_hessian"] = chi_smoothed_hessian;
  j["output"]["dir"] = out_dir;
  j["output"]["snapshot_stride"] = snapshot_stride;
  j["seed"] = seed;
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig c = defaults();
  {
    const json& jg = need(j, "grid", "config");
    const int dim = need(jg, "dim", "grid").get<int>();
    const auto ext = need(jg, "extent", "grid").get<std::vector<double>>();
    const auto nds = need(jg, "nodes", "grid").get<std::vector<int>>();
    if (dim == 1) {
      c.grid = Grid::line(ext.at(0), nds.at(0));
    } else if (dim == 2) {
      c.grid = Grid::rect(ext.at(0), ext.at(1), nds.at(0), nds.at(1));
    } else {
      throw ConfigError("grid.dim must be 1 or 2");
    }
  }
  {
    const json& jt = need(j, "time", "config");
    c.T = need_num(jt, "T", "time");
    c.N = static_cast<int>(need_num(jt, "N", "time"));
  }
  c.eps = need_num(j, "eps", "config");
  if (j.contains("model")) {
    c.model_preset = j["model"].value("preset", "default");
    c.model = model_from_json(j["model"]);
  }
  if (j.contains("initial")) {
    const json& ji = j["initial"];
    if (ji.contains("theta0")) c.theta0 = FieldSpec::from_json(ji["theta0"], "initial.theta0");
    if (ji.contains("u0")) c.u0 = FieldSpec::from_json(ji["u0"], "initial.u0");
    if (ji.contains("u0_prime"))
      c.u0_prime = FieldSpec::from_json(ji["u0_prime"], "initial.u0_prime");
    if (ji.contains("chi0")) c.chi0 = FieldSpec::from_json(ji["chi0"], "initial.chi0");
    c.theta0_floor = ji.value("theta0_floor", false);
  }
  if (j.contains("forcing")) {
    const json& jf = j["forcing"];
    if (jf.contains("R")) {
      c.R_space = FieldSpec::from_json(need(jf["R"], "space", "forcing.R"), "forcing.R.space");
      if (jf["R"].contains("time")) c.R_time = time_from_json(jf["R"]["time"], "forcing.R.time");
    }
    if (jf.contains("B_omega")) {
      c.B_space = FieldSpec::from_json(need(jf["B_omega"], "space", "forcing.B_omega"),
                                       "forcing.B_omega.space");
      if (jf["B_omega"].contains("time"))
        c.B_time = time_from_json(jf["B_omega"]["time"], "forcing.B_omega.time");
    }
    if (jf.contains("b_gamma")) c.b_gamma = BoundarySpec::from_json(jf["b_gamma"], "forcing.b_gamma");
  }
  if (j.contains("tolerances")) {
    const json& jt = j["tolerances"];
    c.newton_tol = jt.value("newton_tol", c.newton_tol);
    c.linear_tol = jt.value("linear_tol", c.linear_tol);
    c.max_newton = jt.value("max_newton", c.max_newton);
  }
  if (j.contains("diagnostics")) {
    const json& jd = j["diagnostics"];
    c.diagnostics_enabled = jd.value("enabled", true);
    c.k_max = jd.value("k_max", 8);
    c.store_full = jd.value("store_full", true);
    c.chi_smoothed_hessian = jd.value("chi_smoothed_hessian", false);
  }
  if (j.contains("output")) {
    c.out_dir = j["output"].value("dir", "out");
    c.snapshot_stride = j["output"].value("snapshot_stride", 0);
  }
  c.seed = j.value("seed", std::uint64_t{12345});
  return c;
}

ExperimentConfig ExperimentConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  return from_json(j);
}

void ExperimentConfig::validate() const {
  if (!(eps > 0.0) || eps >= 1.0) throw ConfigError("eps must lie in (0, 1)");
  model.validate();
  const double tau = T / N;
  if (N < 2) throw ConfigError("time.N must be at least 2");
  if (tau > 1.0) throw ConfigError("tau = T/N must not exceed 1");
  if (!(tau < model.tau_star()))
    throw ConfigError("tau = " + format_double(tau) +
                      " violates the step-size gate, tau* = " + format_double(model.tau_star()));
}

InitialData ExperimentConfig::build_initial() {
  InitialData d;
  d.theta0 = theta0.build(grid);
  if (theta0_floor) {
    bool fired = false;
    for (double& t : d.theta0.v)
      if (t < 1e-8) {
        t = std::max(t, 0.0) + 1e-8;
        fired = true;
      }
    floor_applied = fired;
  }
  d.u0 = u0.build(grid);
  d.u0_prime = u0_prime.build(grid);
  d.chi0 = chi0.build(grid);
  d.R = {R_space.build(grid), R_time};
  d.B_omega = {B_space.build(grid), B_time};
  d.b_gamma = b_gamma.build(grid);
  d.validate(model, T);
  return d;
}

// ---------------------------------------------------------------------------
// CSV I/O
// ---------------------------------------------------------------------------

std::string format_double(double x) {
  char buf[40];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc()) return "nan";
  return std::string(buf, p);
}

ScalarField read_field_csv(const std::string& path, const Grid& g) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open CSV file: " + path);
  ScalarField f(g);
  int count = 0;
  std::string line;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      if (cell.empty()) continue;
      if (count >= g.count()) throw ConfigError("CSV has more values than grid nodes: " + path);
      f[count++] = std::stod(cell);
    }
  }
  if (count != g.count())
    throw ConfigError("CSV node count mismatch in " + path + ": got " + std::to_string(count) +
                      ", expected " + std::to_string(g.count()));
  return f;
}

void write_field_csv(const std::string& path, const ScalarField& f) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write CSV file: " + path);
  const Grid& g = f.grid;
  for (int i = 0; i < g.nodes[0]; ++i) {
    for (int j = 0; j < g.nodes[1]; ++j) {
      if (j) out << ',';
      out << format_double(f[g.idx(i, j)]);
    }
    out << '\n';
  }
}

}  // namespace tmpf
