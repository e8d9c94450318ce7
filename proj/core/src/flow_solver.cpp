#include "wbrom/flow_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "wbrom/error.hpp"

namespace wbrom {

namespace {

constexpr double kSaturationSlack = 1e-10;

void check_saturation(double s) {
  if (!(s >= -1e-12 && s <= 1.0 + 1e-12)) {
    std::ostringstream os;
    os << "saturation " << s << " outside [0, 1]";
    throw Error(ErrorKind::Domain, os.str());
  }
}

double clamp_unit(double s) { return std::clamp(s, 0.0, 1.0); }

bool left_to_right(const BoundaryConditions& bc) { return bc.p_left >= bc.p_right; }

// Transmissibilities of the n + 1 faces (boundary faces use half cells).
Eigen::VectorXd face_transmissibility(const Eigen::VectorXd& s, const FlowProblem& pb) {
  const auto n = static_cast<Eigen::Index>(pb.grid.n_cells);
  const double dx = pb.grid.dx_m();
  const auto& k = pb.rock.permeability;
  const bool forward = left_to_right(pb.bc);
  const double lambda_inflow = total_mobility(pb.bc.s_inflow, pb.fluids);

  Eigen::VectorXd t(n + 1);
  for (Eigen::Index f = 1; f < n; ++f) {
    const double k_face = 2.0 * k[f - 1] * k[f] / (k[f - 1] + k[f]);
    const double s_up = forward ? s[f - 1] : s[f];
    t[f] = k_face * total_mobility(s_up, pb.fluids) / dx;
  }
  const double lambda_left = forward ? lambda_inflow : total_mobility(s[0], pb.fluids);
  const double lambda_right = forward ? total_mobility(s[n - 1], pb.fluids) : lambda_inflow;
  t[0] = 2.0 * k[0] * lambda_left / dx;
  t[n] = 2.0 * k[n - 1] * lambda_right / dx;

  for (Eigen::Index f = 0; f <= n; ++f) {
    if (!(t[f] > 0.0) || !std::isfinite(t[f])) {
      std::ostringstream os;
      os << "pressure system is singular: transmissibility at face " << f << " is " << t[f];
      throw Error(ErrorKind::Singular, os.str());
    }
  }
  return t;
}

void require_size(const Eigen::VectorXd& v, Eigen::Index n, const char* what) {
  if (v.size() != n) {
    std::ostringstream os;
    os << what << " has " << v.size() << " entries, expected " << n;
    throw Error(ErrorKind::SizeMismatch, os.str());
  }
}

}  // namespace

Eigen::VectorXd Grid1D::unit_centers() const {
  const auto n = static_cast<Eigen::Index>(n_cells);
  return (Eigen::VectorXd::LinSpaced(n, 0.0, static_cast<double>(n - 1)).array() + 0.5) /
         static_cast<double>(n);
}

void Grid1D::validate() const {
  if (!(x_min_km < x_max_km)) throw Error(ErrorKind::Config, "grid: x_min must be < x_max");
  if (n_cells < 2) throw Error(ErrorKind::Config, "grid: need at least 2 cells");
}

RockField RockField::homogeneous(const Grid1D& grid, double porosity, double permeability) {
  const auto n = static_cast<Eigen::Index>(grid.n_cells);
  return {Eigen::VectorXd::Constant(n, porosity), Eigen::VectorXd::Constant(n, permeability)};
}

RockField RockField::two_rock(const Grid1D& grid, double porosity_left,
                              double permeability_left, double porosity_right,
                              double permeability_right, double interface_unit) {
  const Eigen::VectorXd xc = grid.unit_centers();
  RockField rock = homogeneous(grid, porosity_right, permeability_right);
  for (Eigen::Index i = 0; i < xc.size(); ++i) {
    if (xc[i] < interface_unit) {
      rock.porosity[i] = porosity_left;
      rock.permeability[i] = permeability_left;
    }
  }
  return rock;
}

void RockField::validate(const Grid1D& grid) const {
  const auto n = static_cast<Eigen::Index>(grid.n_cells);
  require_size(porosity, n, "porosity field");
  require_size(permeability, n, "permeability field");
  if (!(porosity.minCoeff() > 0.0 && porosity.maxCoeff() <= 1.0))
    throw Error(ErrorKind::Config, "rock: porosity must lie in (0, 1]");
  if (!(permeability.minCoeff() > 0.0))
    throw Error(ErrorKind::Config, "rock: permeability must be positive");
}

void FluidParams::validate() const {
  if (!(mu_w > 0.0 && mu_nw > 0.0)) throw Error(ErrorKind::Config, "fluids: viscosities must be positive");
  if (!(beta > 0.0)) throw Error(ErrorKind::Config, "fluids: beta must be positive");
}

void BoundaryConditions::validate() const {
  if (!std::isfinite(p_left) || !std::isfinite(p_right))
    throw Error(ErrorKind::Config, "boundary: pressures must be finite");
  if (!(s_inflow >= 0.0 && s_inflow <= 1.0 && s_initial >= 0.0 && s_initial <= 1.0))
    throw Error(ErrorKind::Config, "boundary: saturations must lie in [0, 1]");
}

void FlowProblem::validate() const {
  grid.validate();
  rock.validate(grid);
  fluids.validate();
  bc.validate();
  if (!(cfl_safety > 0.0 && cfl_safety <= 1.0))
    throw Error(ErrorKind::Config, "cfl safety factor must lie in (0, 1]");
}

double total_mobility(double s, const FluidParams& fluids) {
  check_saturation(s);
  s = clamp_unit(s);
  return std::pow(s, fluids.beta) / fluids.mu_w + std::pow(1.0 - s, fluids.beta) / fluids.mu_nw;
}

double fractional_flow(double s, const FluidParams& fluids) {
  check_saturation(s);
  s = clamp_unit(s);
  const double lw = std::pow(s, fluids.beta) / fluids.mu_w;
  const double lnw = std::pow(1.0 - s, fluids.beta) / fluids.mu_nw;
  return lw / (lw + lnw);
}

double fractional_flow_derivative(double s, const FluidParams& fluids) {
  check_saturation(s);
  s = clamp_unit(s);
  const double b = fluids.beta;
  const double lw = std::pow(s, b) / fluids.mu_w;
  const double lnw = std::pow(1.0 - s, b) / fluids.mu_nw;
  const double dlw = s > 0.0 ? b * std::pow(s, b - 1.0) / fluids.mu_w : (b == 1.0 ? 1.0 / fluids.mu_w : 0.0);
  const double dlnw = s < 1.0 ? -b * std::pow(1.0 - s, b - 1.0) / fluids.mu_nw
                              : (b == 1.0 ? -1.0 / fluids.mu_nw : 0.0);
  const double sum = lw + lnw;
  return (dlw * lnw - lw * dlnw) / (sum * sum);
}

double max_fractional_flow_slope(const FluidParams& fluids) {
  constexpr int kSamples = 1001;
  double best = 0.0;
  for (int k = 0; k < kSamples; ++k) {
    const double s = static_cast<double>(k) / (kSamples - 1);
    best = std::max(best, std::abs(fractional_flow_derivative(s, fluids)));
  }
  return best;
}

Eigen::VectorXd solve_pressure(const Eigen::VectorXd& s, const FlowProblem& problem) {
  const auto n = static_cast<Eigen::Index>(problem.grid.n_cells);
  require_size(s, n, "saturation vector");
  const Eigen::VectorXd t = face_transmissibility(s, problem);

  // Thomas algorithm on the symmetric tridiagonal two-point system.
  Eigen::VectorXd diag(n), upper(n), rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    diag[i] = t[i] + t[i + 1];
    upper[i] = -t[i + 1];
    rhs[i] = 0.0;
  }
  rhs[0] += t[0] * problem.bc.p_left;
  rhs[n - 1] += t[n] * problem.bc.p_right;

  Eigen::VectorXd c(n), d(n);
  c[0] = upper[0] / diag[0];
  d[0] = rhs[0] / diag[0];
  for (Eigen::Index i = 1; i < n; ++i) {
    const double lower = -t[i];
    const double m = diag[i] - lower * c[i - 1];
    c[i] = upper[i] / m;
    d[i] = (rhs[i] - lower * d[i - 1]) / m;
  }
  Eigen::VectorXd p(n);
  p[n - 1] = d[n - 1];
  for (Eigen::Index i = n - 2; i >= 0; --i) p[i] = d[i] - c[i] * p[i + 1];
  return p;
}

Eigen::VectorXd total_velocity(const Eigen::VectorXd& p, const Eigen::VectorXd& s,
                               const FlowProblem& problem) {
  const auto n = static_cast<Eigen::Index>(problem.grid.n_cells);
  require_size(p, n, "pressure vector");
  require_size(s, n, "saturation vector");
  const Eigen::VectorXd t = face_transmissibility(s, problem);
  Eigen::VectorXd v(n + 1);
  v[0] = t[0] * (problem.bc.p_left - p[0]);
  for (Eigen::Index f = 1; f < n; ++f) v[f] = t[f] * (p[f - 1] - p[f]);
  v[n] = t[n] * (p[n - 1] - problem.bc.p_right);
  return v;
}

namespace {

// The slope depends only on the fluids, so the time loop samples it once.
double cfl_step(const Eigen::VectorXd& v, const FlowProblem& problem, double safety, double slope) {
  const auto n = static_cast<Eigen::Index>(problem.grid.n_cells);
  const double dx = problem.grid.dx_m();
  double dt = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double vmax = std::max(std::abs(v[i]), std::abs(v[i + 1]));
    const double speed = vmax * slope;
    if (speed > 0.0) dt = std::min(dt, problem.rock.porosity[i] * dx / speed);
  }
  if (!std::isfinite(dt))
    throw Error(ErrorKind::Domain, "cfl time step is unbounded: all face fluxes are zero");
  return safety * dt;
}

}  // namespace

double cfl_timestep(const Eigen::VectorXd& v, const FlowProblem& problem, double safety) {
  require_size(v, static_cast<Eigen::Index>(problem.grid.n_cells) + 1, "face flux vector");
  if (!(safety > 0.0 && safety <= 1.0))
    throw Error(ErrorKind::Domain, "cfl safety factor must lie in (0, 1]");
  return cfl_step(v, problem, safety, max_fractional_flow_slope(problem.fluids));
}

Eigen::VectorXd upwind_water_flux(const Eigen::VectorXd& s, const Eigen::VectorXd& v,
                                  const FlowProblem& problem) {
  const auto n = static_cast<Eigen::Index>(problem.grid.n_cells);
  require_size(s, n, "saturation vector");
  require_size(v, n + 1, "face flux vector");
  const double s_in = problem.bc.s_inflow;
  Eigen::VectorXd flux(n + 1);
  for (Eigen::Index f = 0; f <= n; ++f) {
    double s_up;
    if (v[f] >= 0.0) {
      s_up = f == 0 ? s_in : s[f - 1];
    } else {
      s_up = f == n ? s_in : s[f];
    }
    flux[f] = v[f] * fractional_flow(s_up, problem.fluids);
  }
  return flux;
}

namespace {

Eigen::VectorXd apply_flux(const Eigen::VectorXd& s, const Eigen::VectorXd& flux, double dt,
                           const FlowProblem& problem) {
  const auto n = s.size();
  const double dx = problem.grid.dx_m();
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double value = s[i] - dt / (problem.rock.porosity[i] * dx) * (flux[i + 1] - flux[i]);
    if (value < -kSaturationSlack || value > 1.0 + kSaturationSlack) {
      std::ostringstream os;
      os << "saturation update left [0, 1] at cell " << i << " (value " << value
         << ", dt " << dt << " s)";
      throw Error(ErrorKind::CflViolation, os.str());
    }
    out[i] = clamp_unit(value);
  }
  return out;
}

}  // namespace

Eigen::VectorXd advance_saturation(const Eigen::VectorXd& s, const Eigen::VectorXd& v,
                                   double dt, const FlowProblem& problem) {
  if (dt < 0.0) throw Error(ErrorKind::Domain, "negative time step");
  return apply_flux(s, upwind_water_flux(s, v, problem), dt, problem);
}

double water_volume(const Eigen::VectorXd& s, const FlowProblem& problem) {
  return problem.grid.dx_m() * problem.rock.porosity.dot(s);
}

SimulationResult run_simulation(const FlowProblem& problem,
                                std::span<const double> snapshot_times_s) {
  problem.validate();
  if (!std::is_sorted(snapshot_times_s.begin(), snapshot_times_s.end()))
    throw Error(ErrorKind::Domain, "snapshot times must be sorted");
  if (!snapshot_times_s.empty() && snapshot_times_s.front() < 0.0)
    throw Error(ErrorKind::Domain, "snapshot times must be nonnegative");

  const auto n = static_cast<Eigen::Index>(problem.grid.n_cells);
  Eigen::VectorXd s = Eigen::VectorXd::Constant(n, problem.bc.s_initial);
  double t = 0.0;
  double inflow = 0.0;

  const double slope = max_fractional_flow_slope(problem.fluids);
  SimulationResult result;
  result.times_s.reserve(snapshot_times_s.size());
  result.saturations.reserve(snapshot_times_s.size());
  result.net_inflow.reserve(snapshot_times_s.size());

  for (const double target : snapshot_times_s) {
    while (t < target) {
      try {
        const Eigen::VectorXd p = solve_pressure(s, problem);
        const Eigen::VectorXd v = total_velocity(p, s, problem);
        const double remaining = target - t;
        double dt = remaining;
        if (v.cwiseAbs().maxCoeff() > 0.0)
          dt = std::min(remaining, cfl_step(v, problem, problem.cfl_safety, slope));
        const Eigen::VectorXd flux = upwind_water_flux(s, v, problem);
        s = apply_flux(s, flux, dt, problem);
        inflow += dt * (flux[0] - flux[n]);
        t = dt == remaining ? target : t + dt;
        ++result.steps;
      } catch (const Error& e) {
        std::ostringstream os;
        os << "time step " << result.steps << " at t = " << t << " s: " << e.what();
        throw Error(e.kind(), os.str());
      }
    }
    result.times_s.push_back(target);
    result.saturations.push_back(s);
    result.net_inflow.push_back(inflow);
  }
  return result;
}

}  // namespace wbrom
