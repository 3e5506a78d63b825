#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include <cmath>

#include "tmpf/experiments.hpp"

using namespace tmpf;
namespace fs = std::filesystem;

namespace {
struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("tmpf_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { std::error_code ec; fs::remove_all(path, ec); }
};
}  // namespace

TEST_CASE("config round-trip: parse -> serialize -> parse is the identity") {
  for (const char* preset : {"default", "decoupled-wave", "hostile"}) {
    const ExperimentConfig a = ExperimentConfig::preset(preset);
    const json ja = a.to_json();
    const ExperimentConfig b = ExperimentConfig::from_json(ja);
    const json jb = b.to_json();
    CHECK(ja.dump() == jb.dump());
  }
}

TEST_CASE("config: missing keys are reported by name") {
  json j;
  j["time"]["T"] = 1.0;
  j["time"]["N"] = 10;
  j["eps"] = 0.1;
  try {
    ExperimentConfig::from_json(j);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("grid") != std::string::npos);
  }

  json j2 = ExperimentConfig::defaults().to_json();
  j2.erase("eps");
  CHECK_THROWS_AS(ExperimentConfig::from_json(j2), ConfigError);
}

TEST_CASE("config validation gates") {
  ExperimentConfig c = ExperimentConfig::defaults();
  c.eps = 1.2;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = ExperimentConfig::defaults();
  c.N = 1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = ExperimentConfig::defaults();
  c.T = 300.0;  // tau = 1.5 > 1
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = ExperimentConfig::defaults();
  c.model.theta_c = 400.0;  // tau* = 1/400 < tau
  CHECK_THROWS_AS(c.validate(), ConfigError);
  ExperimentConfig::defaults().validate();
}

TEST_CASE("field CSV round trip and schema") {
  TempDir tmp;
  const Grid g = Grid::rect(1.0, 1.0, 4, 5);
  ScalarField f(g);
  for (int k = 0; k < g.count(); ++k) f[k] = 0.125 * k - 1.0;
  const std::string path = (tmp.path / "field.csv").string();
  write_field_csv(path, f);

  // row-major: one grid row per line, ny comma-separated values
  std::ifstream in(path);
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 4);
    CHECK(line.find(' ') == std::string::npos);
  }
  CHECK(rows == 4);

  const ScalarField f2 = read_field_csv(path, g);
  for (int k = 0; k < g.count(); ++k) CHECK(f2[k] == f[k]);  // bit-exact via round trip

  const Grid wrong = Grid::line(1.0, 7);
  CHECK_THROWS_AS(read_field_csv(path, wrong), ConfigError);
}

TEST_CASE("CSV initial data feeds a run") {
  TempDir tmp;
  const Grid g = Grid::line(1.0, 17);
  ScalarField chi0(g);
  for (int i = 0; i < g.count(); ++i) chi0[i] = 0.3 - 0.02 * i;
  const std::string path = (tmp.path / "chi0.csv").string();
  write_field_csv(path, chi0);

  ExperimentConfig cfg = ExperimentConfig::defaults();
  cfg.grid = g;
  cfg.N = 5;
  cfg.chi0.kind = FieldSpec::Kind::Csv;
  cfg.chi0.csv_path = path;
  RunResult r = run_experiment(cfg);
  CHECK(r.traj.complete);
}

TEST_CASE("format_double is locale-independent and round-trips") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(-3.5e-12).find(',') == std::string::npos);
  const double x = 1.0 / 3.0;
  CHECK(std::stod(format_double(x)) == x);
}

TEST_CASE("run writes series CSV with the fixed header and a summary") {
  TempDir tmp;
  ExperimentConfig cfg = ExperimentConfig::defaults();
  cfg.N = 5;
  cfg.snapshot_stride = 2;
  const std::string dir = (tmp.path / "run").string();
  RunResult r = run_experiment(cfg, dir);
  REQUIRE(r.traj.complete);

  std::ifstream series(dir + "/series.csv");
  REQUIRE(series.good());
  std::string header;
  std::getline(series, header);
  CHECK(header ==
        "n,t,mass_w,entropy,theta_min,energy_mech,energy_residual_rel,mass_budget_residual,"
        "w_budget_gap,newton_iterations,newton_residual,sigma_consistency,beta_chi_l2");
  int rows = 0;
  std::string line;
  while (std::getline(series, line)) ++rows;
  CHECK(rows == 6);  // N + 1 levels

  CHECK(fs::exists(dir + "/summary.json"));
  CHECK(fs::exists(dir + "/theta_0000.csv"));
  CHECK(fs::exists(dir + "/chi_0004.csv"));

  std::ifstream sj(dir + "/summary.json");
  json summary;
  sj >> summary;
  CHECK(summary["tau"].get<double>() == doctest::Approx(cfg.T / cfg.N));
  CHECK(summary["tau_star"].get<double>() == doctest::Approx(1.0));
  CHECK(summary["tau_below_star"].get<bool>());
  CHECK(summary["completed"].get<bool>());
}

TEST_CASE("summary is written even when the run aborts") {
  TempDir tmp;
  ExperimentConfig cfg = ExperimentConfig::defaults();
  cfg.N = 5;
  cfg.max_newton = 0;  // guarantees a chi-step failure
  const std::string dir = (tmp.path / "abort").string();
  RunResult r = run_experiment(cfg, dir);
  CHECK_FALSE(r.traj.complete);
  CHECK(fs::exists(dir + "/summary.json"));
  std::ifstream sj(dir + "/summary.json");
  json summary;
  sj >> summary;
  CHECK_FALSE(summary["completed"].get<bool>());
  CHECK_FALSE(summary["error"].get<std::string>().empty());
}

TEST_CASE("minimal config: N=2 over 5 nodes yields a 3-row series") {
  TempDir tmp;
  ExperimentConfig cfg = ExperimentConfig::defaults();
  cfg.grid = Grid::line(1.0, 5);
  cfg.N = 2;
  const std::string dir = (tmp.path / "minimal").string();
  RunResult r = run_experiment(cfg, dir);
  REQUIRE(r.traj.complete);
  std::ifstream series(dir + "/series.csv");
  int rows = -1;  // discount the header
  std::string line;
  while (std::getline(series, line)) ++rows;
  CHECK(rows == 3);
}

TEST_CASE("config file loading and error reporting") {
  TempDir tmp;
  const std::string path = (tmp.path / "cfg.json").string();
  {
    std::ofstream out(path);
    out << ExperimentConfig::defaults().to_json().dump(2);
  }
  const ExperimentConfig c = ExperimentConfig::load_file(path);
  CHECK(c.N == 200);
  CHECK_THROWS_AS(ExperimentConfig::load_file((tmp.path / "nope.json").string()), ConfigError);

  {
    std::ofstream out(path);
    out << "{ not json";
  }
  CHECK_THROWS_AS(ExperimentConfig::load_file(path), ConfigError);
}

TEST_CASE("verify suite: deterministic under the seed, mutation is caught") {
  const VerifyReport a = verify_suite(7);
  const VerifyReport b = verify_suite(7);
  CHECK(a.all_passed);
  REQUIRE(a.suites.size() == b.suites.size());
  for (size_t i = 0; i < a.suites.size(); ++i) {
    CHECK(a.suites[i].name == b.suites[i].name);
    CHECK(a.suites[i].passed == b.suites[i].passed);
    CHECK(a.suites[i].detail == b.suites[i].detail);
  }

  VerifyOptions mutated;
  mutated.lambda_scale = 1.01;  // corrupt lambda_eps by 1%
  const VerifyReport m = verify_suite(7, mutated);
  CHECK_FALSE(m.all_passed);
  bool kernel_failed = false;
  for (const auto& s : m.suites)
    if (s.name == "regularization-certificates") kernel_failed = !s.passed;
  CHECK(kernel_failed);
}

TEST_CASE("tabulated model pieces parse, validate and run") {
  ExperimentConfig cfg = ExperimentConfig::defaults();
  json j = cfg.to_json();
  // alpha tabulated from samples of 0.5(1 - e^{ -r })
  {
    json tab;
    tab["kind"] = "tabulated";
    tab["x0"] = 0.0;
    tab["dx"] = 6.0 / 600;
    std::vector<double> vals;
    for (int i = 0; i <= 600; ++i) {
      const double r = i * 6.0 / 600;
      vals.push_back(0.5 * (1.0 - std::exp(-r)));
    }
    tab["values"] = vals;
    j["model"]["alpha"] = tab;
  }
  ExperimentConfig c2 = ExperimentConfig::from_json(j);
  c2.N = 10;
  c2.validate();
  RunResult r = run_experiment(c2);
  CHECK(r.traj.complete);
}

TEST_CASE("theta0 floor option keeps ln(theta0) finite and is recorded") {
  ExperimentConfig cfg = ExperimentConfig::defaults();
  cfg.grid = Grid::line(1.0, 17);
  cfg.N = 4;
  cfg.theta0 = FieldSpec::cosine(0.5, 0.5);  // touches zero at x = 1
  cfg.theta0_floor = true;
  RunResult r = run_experiment(cfg);
  REQUIRE(r.traj.complete);
  CHECK(r.summary.floor_applied);
  CHECK(r.summary.config_echo["initial"]["theta0_floor"].get<bool>());
  for (const auto& row : r.report.entropy.rows) CHECK(std::isfinite(row.entropy));
}
