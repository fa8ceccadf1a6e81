#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mmt/conditions.hpp"
#include "mmt/initial_conditions.hpp"
#include "mmt/jko.hpp"
#include "mmt/pde.hpp"

namespace mmt {

/// One structured configuration document per run. Parsing is strict: unknown
/// keys are rejected with a path-qualified ConfigError, and the fully
/// resolved document (defaults included) is re-serialized so every run can
/// store exactly what it executed.
struct DensitySpec {
  std::string kind;  // profiles | csv
  std::vector<ProfileSpec> components;
  std::string csv_path;
};

struct MobilitySpec {
  std::string family;  // fully-decoupled | perturbed-decoupled | volume-filling |
                       // radial-ball | induced-by-h
  std::vector<std::string> mobility_exprs;  // per component; empty entry = quadratic
  double epsilon = 0.1;
  int dimension = 0;
  std::string h_expr;
  bool c3_exempt = false;
  std::string derivative_mode = "analytic";
  double fd_step = 1e-5;
  double interior_margin = 1e-9;
};

struct SpaceSpec {
  std::string kind;  // cuboid | simplex | ball
  std::vector<double> lower, upper;
  int dimension = 0;
};

struct EnergyConfig {
  std::string f_type = "quadratic";  // quadratic | expression | h
  std::vector<std::vector<double>> Q;
  double eps = 0.0;
  std::string r_expr;
  std::string f_expr;
  double C_f = 1.0;
  std::vector<std::string> eta;
  double eta_support_lo = 0.0, eta_support_hi = 0.0;
  std::vector<double> zbar;
  std::string ref_case = "B";
};

struct DiscretizationConfig {
  int time_steps = 16;
  int inner_steps = 4;
  int max_iters = 50000;
  double rel_energy_tol = 1e-7;
  double residual_tol = 1e-12;
  double solver_tol = 2e-3;
  double step_ratio = 1.0;
  int check_every = 25;
  double mass_tol = 1e-8;
};

struct JkoConfig {
  double tau = 0.0125;
  double t_final = 0.1;
};

struct FdBlockConfig {
  double dt = 0.0;
  double cfl_safety = 0.25;
  bool clamp_midpoints = true;
  int record_stride = 1;
  double t_final = 0.1;
};

struct HeatConfig {
  double t = 0.01;
};

struct TransportConfig {
  double alpha = 1.0;
  std::vector<std::string> rho;
  double t_final = 0.1;
};

struct ConditionsConfig {
  std::vector<std::string> checks;  // C0 C1 C2 C2strict C3 mccann potential
                                    // diag-domination concavity
  SamplePlan plan;
  int boundary_samples = 512;
  std::optional<EnergyConfig> mccann_f;
  double potential_alpha = 1.0;
  double potential_R = 1.0;
  std::optional<double> potential_lambda;
  std::optional<MobilitySpec> diag_reference;
  std::vector<double> k_grid;
  std::vector<double> epsilon_grid;
};

struct DiagnoseConfig {
  std::string run_dir;
  std::vector<std::string> checks;
};

struct OutputConfig {
  std::string directory = "out";
  int stride = 1;
  uint64_t seed = 1;
};

struct RunConfig {
  std::optional<SpaceSpec> space;
  std::optional<MobilitySpec> mobility;
  std::optional<Grid1D> grid_spec;
  DiscretizationConfig discretization;
  std::optional<EnergyConfig> energy;
  std::optional<DensitySpec> mu0, mu1;  // endpoints
  std::optional<DensitySpec> initial;
  std::optional<JkoConfig> jko;
  FdBlockConfig fd;
  HeatConfig heat;
  std::optional<TransportConfig> transport;
  std::optional<ConditionsConfig> conditions;
  std::optional<DiagnoseConfig> diagnose;
  OutputConfig output;

  static RunConfig load(const std::filesystem::path& path);
  static RunConfig parse(const std::string& json_text);

  /// Fully resolved document with defaults materialized.
  std::string resolved_text() const;

  MobilityModel make_model() const;
  Grid1D grid() const;
  GridDensity render_density(const DensitySpec& spec) const;
  SolverOptions solver_options() const;
  JkoOptions jko_options() const;
  EnergySpec make_energy(const MobilityModel& model,
                         const GridDensity* mass_source) const;
  FdConfig fd_config() const;
  static MobilityModel make_model_from(const MobilitySpec& mob,
                                       const std::optional<SpaceSpec>& space);
};

}  // namespace mmt
