#pragma once

// Experiment configuration (JSON, schema version 1).
//
// Recognised parameter axis names and what they vary:
//   mu_ratio  non-wetting viscosity, mu_nw = mu_ratio * mu_w
//   beta      relative permeability exponent
//   k_lp      permeability of the right-hand rock type (m^2)
//   gamma     interface position on (0, 1); left rock for x < gamma

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "wbrom/flow_solver.hpp"
#include "wbrom/greedy.hpp"

namespace wbrom {

inline constexpr int kConfigSchemaVersion = 1;

struct ParameterAxis {
  std::string name;
  std::vector<double> values;
};

struct PhysicsSpec {
  double porosity_left = 0.1;
  double permeability_left = 1e-13;
  double porosity_right = 0.1;
  double permeability_right = 1e-13;
  double interface = 1.0;  // on (0, 1); 1 means homogeneous left rock
  FluidParams fluids;
  BoundaryConditions bc;
  double cfl_safety = 0.9;
};

struct ExperimentConfig {
  int schema_version = kConfigSchemaVersion;
  std::string name;
  Grid1D grid;
  PhysicsSpec physics;
  std::vector<ParameterAxis> parameters;
  std::vector<double> snapshot_times_years;
  GreedySettings greedy;
  std::vector<double> tolerances{0.1, 0.05, 0.01, 0.005};
  std::string output_dir;  // default for the CLI --out flag; may be empty

  /// Throws Error(Config) with a message naming the offending field.
  void validate() const;

  std::vector<std::string> parameter_names() const;
  /// All parameter vectors y of the sweep, last axis varying fastest.
  std::vector<std::vector<double>> parameter_combinations() const;
  FlowProblem problem_for(const std::vector<double>& y) const;
  std::size_t expected_snapshot_count() const;
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const ExperimentConfig& config);

}  // namespace wbrom
