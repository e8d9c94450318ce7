#pragma once

// Finite-volume IMPES solver for incompressible two-phase flow in a 1D
// porous column. Pressure is solved implicitly with a two-point flux
// approximation, saturation is advanced explicitly with first-order upwinding.
// Gravity and capillary pressure are not modelled.

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace wbrom {

inline constexpr double kSecondsPerYear = 365.25 * 86400.0;

struct Grid1D {
  double x_min_km = 0.0;
  double x_max_km = 1.0;
  std::size_t n_cells = 1002;

  double length_km() const { return x_max_km - x_min_km; }
  double dx_km() const { return length_km() / static_cast<double>(n_cells); }
  double dx_m() const { return 1000.0 * dx_km(); }
  /// Cell width on the reference domain (0, 1).
  double dx_unit() const { return 1.0 / static_cast<double>(n_cells); }
  /// Cell centres mapped to (0, 1).
  Eigen::VectorXd unit_centers() const;

  void validate() const;
};

struct RockField {
  Eigen::VectorXd porosity;      // fraction, (0, 1]
  Eigen::VectorXd permeability;  // m^2

  static RockField homogeneous(const Grid1D& grid, double porosity,
                               double permeability);

  /// Two rock types: cells whose centre lies left of `interface_unit`
  /// (a position on the reference domain) get the left properties.
  static RockField two_rock(const Grid1D& grid, double porosity_left,
                            double permeability_left, double porosity_right,
                            double permeability_right, double interface_unit);

  void validate(const Grid1D& grid) const;
};

struct FluidParams {
  double mu_w = 0.003;   // Pa s
  double mu_nw = 0.003;  // Pa s
  double beta = 2.0;     // relative permeability exponent, k_r = s^beta

  void validate() const;
};

struct BoundaryConditions {
  double p_left = 4.137e7;   // Pa
  double p_right = 2.758e7;  // Pa
  double s_inflow = 1.0;
  double s_initial = 0.0;

  void validate() const;
};

struct FlowProblem {
  Grid1D grid;
  RockField rock;
  FluidParams fluids;
  BoundaryConditions bc;
  double cfl_safety = 0.9;

  void validate() const;
};

double total_mobility(double s, const FluidParams& fluids);
double fractional_flow(double s, const FluidParams& fluids);
double fractional_flow_derivative(double s, const FluidParams& fluids);

/// max |f_w'(s)| sampled on 1001 equispaced saturations in [0, 1].
double max_fractional_flow_slope(const FluidParams& fluids);

/// Cell pressures from the two-point discretisation of div(v) = 0 with
/// Dirichlet pressures at both ends (imposed through half-cell
/// transmissibilities). Face mobilities are upwinded along the flow
/// direction, which in 1D is fixed by the boundary pressure drop.
Eigen::VectorXd solve_pressure(const Eigen::VectorXd& s, const FlowProblem& problem);

/// Total Darcy flux (m/s) through the n_cells + 1 faces, left to right
/// positive. Face 0 is the left boundary, face n_cells the right one.
Eigen::VectorXd total_velocity(const Eigen::VectorXd& p, const Eigen::VectorXd& s,
                               const FlowProblem& problem);

/// Largest stable explicit step: safety * min_i phi_i dx / (max|v_face(i)| L_f).
/// Throws Error(Domain) when every flux is zero (the step is unbounded).
double cfl_timestep(const Eigen::VectorXd& v, const FlowProblem& problem,
                    double safety);

/// Per-face upwind water flux v * f_w(s_upwind); inflow faces use s_inflow.
Eigen::VectorXd upwind_water_flux(const Eigen::VectorXd& s, const Eigen::VectorXd& v,
                                  const FlowProblem& problem);

/// One explicit upwind step. Throws Error(CflViolation) if any saturation
/// leaves [-1e-10, 1 + 1e-10]; round-off inside that band is snapped back.
Eigen::VectorXd advance_saturation(const Eigen::VectorXd& s, const Eigen::VectorXd& v,
                                   double dt, const FlowProblem& problem);

struct SimulationResult {
  std::vector<double> times_s;
  std::vector<Eigen::VectorXd> saturations;
  /// Net water volume per unit cross-section (m) that entered through the
  /// boundaries between t = 0 and each snapshot time.
  std::vector<double> net_inflow;
  std::size_t steps = 0;
};

/// IMPES time loop. Steps are truncated so that every requested time is hit
/// exactly. `snapshot_times_s` must be sorted and nonnegative.
SimulationResult run_simulation(const FlowProblem& problem,
                                std::span<const double> snapshot_times_s);

/// Pore volume weighted water content sum_i phi_i dx s_i (m).
double water_volume(const Eigen::VectorXd& s, const FlowProblem& problem);

}  // namespace wbrom
