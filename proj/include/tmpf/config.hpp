#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "tmpf/data_prep.hpp"
#include "tmpf/model_functions.hpp"

namespace tmpf {

using nlohmann::json;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Spatial profile of an initial datum or source term.
struct FieldSpec {
  enum class Kind { Constant, Cosine, Gaussian, Linear, Csv };
  Kind kind = Kind::Constant;
  double value = 0.0;      // Constant
  double offset = 0.0;     // Cosine / Gaussian / Linear
  double amplitude = 0.0;  // Cosine / Gaussian
  double freq = 1.0;       // Cosine: offset + amp * prod_d cos(freq pi x_d / L_d)
  double center = 0.5;     // Gaussian, relative to the extent
  double width = 0.1;      // Gaussian, relative to the extent
  double slope = 0.0;      // Linear: offset + slope * x
  std::string csv_path;

  static FieldSpec constant(double v);
  static FieldSpec cosine(double offset, double amplitude, double freq = 1.0);
  static FieldSpec linear(double offset, double slope);

  ScalarField build(const Grid& g) const;
  json to_json() const;
  static FieldSpec from_json(const json& j, const std::string& where);
};

struct BoundarySpec {
  bool use_ends = false;  // 1D left/right values; otherwise constant
  double value = 0.0;
  double left = 0.0, right = 0.0;
  TimeProfile time;

  BoundaryForcing build(const Grid& g) const;
  json to_json() const;
  static BoundarySpec from_json(const json& j, const std::string& where);
};

struct ExperimentConfig {
  Grid grid = Grid::line(1.0, 65);
  double T = 1.0;
  int N = 200;
  double eps = 0.1;

  std::string model_preset = "default";
  ModelFunctions model;

  FieldSpec theta0, u0, u0_prime, chi0;
  bool theta0_floor = false;  // shift zero data by 1e-8 to keep ln(theta0) finite

  FieldSpec R_space, B_space;
  TimeProfile R_time, B_time;
  BoundarySpec b_gamma;

  double newton_tol = 1e-10;
  double linear_tol = 1e-12;
  int max_newton = 50;

  bool diagnostics_enabled = true;
  int k_max = 8;
  bool store_full = true;
  bool chi_smoothed_hessian = false;

  std::string out_dir = "out";
  int snapshot_stride = 0;  // 0 = no snapshots
  std::uint64_t seed = 12345;

  bool floor_applied = false;  // set by build_initial when the floor fires

  /// The default experiment: 1D, 65 nodes, T=1, N=200, eps=0.1, indicator F1,
  /// theta0 = 1 + 0.2 cos(pi x), chi0 = 0.5 cos(pi x), R = 0.1.
  static ExperimentConfig defaults();
  /// Named experiment presets: "default", "decoupled-wave", "hostile".
  static ExperimentConfig preset(const std::string& name);

  static ExperimentConfig from_json(const json& j);
  json to_json() const;
  static ExperimentConfig load_file(const std::string& path);

  /// Validates tau < tau*, eps in (0,1), dim in {1,2} and the model certificates.
  void validate() const;

  InitialData build_initial();  // may set floor_applied
};

// CSV nodal tables, row-major; 2D files carry one grid row per line.
ScalarField read_field_csv(const std::string& path, const Grid& g);
void write_field_csv(const std::string& path, const ScalarField& f);

/// Locale-independent shortest-round-trip formatting used in every CSV/JSON.
std::string format_double(double x);

}  // namespace tmpf
