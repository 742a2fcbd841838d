#pragma once

// Modified volume-preserving mean curvature flow for rank-2 weighted root
// systems, integrated as a radial graph over one closed Weyl chamber.
//
// The curve is r(theta) over the chamber arc [theta_lo, theta_hi]; W-invariance
// makes r even across both walls, which the discretization enforces through
// ghost nodes r_{-1} = r_1 and r_{n+1} = r_{n-1}. Each node moves radially with
//
//   dr/dt = (Hbar - H_mod) * sqrt(r^2 + r'^2) / r,
//
// which is normal speed (Hbar - H_mod) expressed at fixed angle.

#include "weylflow/rootsys.hpp"

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace weylflow {

struct RadialProfile {
  std::vector<double> thetas;  // n+1 uniform nodes, endpoints on the walls
  std::vector<double> radii;
  // Optional split radii[i] = base + deviation[i]. Differences of nearly
  // equal radii are taken from the deviation, whose rounding scales with
  // |r - base| rather than r.
  double base = 0.0;
  std::vector<double> deviation;

  /// The deviation when base + deviation reproduces radii exactly, otherwise
  /// radii. Either has the same differences as radii.
  const std::vector<double>& differencing_values() const;
  /// Sets base and deviation from radii, rounding radii onto the split.
  void split_at(double new_base);

  std::size_t intervals() const { return radii.empty() ? 0 : radii.size() - 1; }
  double dtheta() const { return (thetas.back() - thetas.front()) / static_cast<double>(intervals()); }
  double arc_width() const { return thetas.back() - thetas.front(); }
};

RadialProfile init_profile(const WeightedRootSystem& S, double r0, int n);

/// Polar-curve curvature, positive for convex curves (circle: 1/r).
std::vector<double> curve_curvature(const RadialProfile& profile);

/// Per-node geometry and curvature fields of a profile.
struct NodeFields {
  std::vector<double> dr;     // r'
  std::vector<double> ddr;    // r''
  std::vector<double> speed;  // sqrt(r^2 + r'^2) = ds/dtheta
  std::vector<double> kappa;
  std::vector<double> rho;
  std::vector<double> H_mod;  // kappa + rho
};

/// Modified curvature kappa + rho at every node.
///
/// Interior nodes use the generic root terms. At the two wall nodes the
/// roots vanishing on the wall contribute the limit of the generic term
/// along the curve, m (r - r'') / r^2, which reduces to m / r on round
/// profiles.
NodeFields evaluate_fields(const WeightedRootSystem& S, const RadialProfile& profile);

std::vector<double> modified_H(const WeightedRootSystem& S, const RadialProfile& profile);

/// Arclength-weighted trapezoidal mean of a nodal field.
double arclength_average(const RadialProfile& profile, const std::vector<double>& speed,
                         const std::vector<double>& field);

double average_H(const WeightedRootSystem& S, const RadialProfile& profile);

/// Area enclosed by the full W-orbit of the profile.
double enclosed_area(const RadialProfile& profile);

/// Length of the chamber arc of the curve.
double arc_length(const RadialProfile& profile, const std::vector<double>& speed);

/// cfl * (min_i r_i * dtheta)^2.
double stable_dt(const RadialProfile& profile, double cfl);

enum class ConvergenceStatus { running, converged, max_steps, blow_up, left_domain };
std::string to_string(ConvergenceStatus s);

struct FlowState {
  std::int64_t step = 0;
  double t = 0.0;
  RadialProfile profile;
  std::vector<double> kappa;
  std::vector<double> rho;
  std::vector<double> H_mod;
  std::vector<double> speed;  // ds/dtheta
  double H_bar = 0.0;
  double area = 0.0;
  double length = 0.0;
  ConvergenceStatus status = ConvergenceStatus::running;

  /// max_i |H_mod_i - H_bar|
  double cmc_residual() const;
  /// max_i |dr_i/dt|
  double max_radial_speed() const;
};

FlowState make_state(const WeightedRootSystem& S, RadialProfile profile, double t = 0.0, std::int64_t step = 0);

/// One explicit Euler step. Returns a state flagged blow_up or left_domain
/// when the update is non-finite or leaves (0, r_S).
FlowState step(const WeightedRootSystem& S, const FlowState& state, double dt);

struct FlowConfig {
  int n = 256;
  double r0 = 0.1;
  double cfl = 0.25;
  double tol_cmc = 1e-6;   // relative to |H_bar|
  double tol_rate = 1e-6;  // relative to |H_bar|
  std::int64_t max_steps = 5'000'000;
  std::int64_t sample_every = 1000;
  double wall_tolerance = 1e-9;

  /// Throws std::invalid_argument when a field is out of range.
  void validate(const WeightedRootSystem& S) const;
};

/// Extremes over every step, including the ones not sampled.
struct RunningExtremes {
  double min_kappa = 0.0;
  double min_radius = 0.0;
  double max_radius = 0.0;
  double min_H_mod = 0.0;
  double max_H_mod = 0.0;
  double max_area_drift = 0.0;  // relative
};

struct Trajectory {
  std::vector<FlowState> states;
  ConvergenceStatus status = ConvergenceStatus::running;
  std::int64_t steps = 0;
  RunningExtremes extremes;

  const FlowState& initial() const { return states.front(); }
  const FlowState& final() const { return states.back(); }
};

/// Integrates from the round profile of radius config.r0 until
/// max|H_mod - H_bar| < tol_cmc*|H_bar| and max|dr/dt| < tol_rate*|H_bar|,
/// or until a terminal flag. States are sampled every sample_every steps;
/// the first and last states are always kept.
Trajectory run_flow(const WeightedRootSystem& S, const FlowConfig& config);

/// Same, starting from an arbitrary profile.
Trajectory run_flow_from(const WeightedRootSystem& S, const RadialProfile& start, const FlowConfig& config);

/// The closed curve obtained by applying every element of W to the arc
/// samples, wall duplicates removed, ordered by angle.
std::vector<Vec> full_orbit_curve(const WeightedRootSystem& S, const WeylGroup& W, const RadialProfile& profile);

nlohmann::json to_json(const FlowConfig& c);
FlowConfig flow_config_from_json(const nlohmann::json& j, const WeightedRootSystem& S);

}  // namespace weylflow
