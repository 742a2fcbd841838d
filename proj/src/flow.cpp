#include "weylflow/flow.hpp"

#include "weylflow/curvature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

namespace weylflow {

namespace {

struct PlanarRoot {
  double ax, ay, norm;
  int mult;
};

std::vector<PlanarRoot> planar_roots(const WeightedRootSystem& S) {
  if (S.rank() != 2) throw std::invalid_argument("the curve flow is implemented for rank-2 systems only");
  std::vector<PlanarRoot> out;
  for (std::size_t i = 0; i < S.positive_roots().size(); ++i) {
    const auto& a = S.positive_roots()[i];
    if (S.multiplicities()[i] == 0) continue;
    out.push_back({a.coeffs()[0], a.coeffs()[1], a.norm(), S.multiplicities()[i]});
  }
  return out;
}

NodeFields evaluate_fields_impl(const WeightedRootSystem& S, const RadialProfile& p, double wall_tolerance) {
  const std::size_t n = p.intervals();
  if (n < 2) throw std::invalid_argument("profile needs at least two intervals");
  const auto roots = planar_roots(S);
  const double h = p.dtheta();
  const double inv_h2 = 1.0 / (h * h);
  const int eps = S.epsilon();
  const auto& r = p.radii;
  const auto& u = p.differencing_values();
  for (double ri : r)
    if (!(ri > 0.0 && ri < S.r_S())) throw DomainError(fmt::format("profile radius {} outside (0, r_S)", ri));

  NodeFields f;
  for (auto* v : {&f.dr, &f.ddr, &f.speed, &f.kappa, &f.rho, &f.H_mod}) v->resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    const double um = i == 0 ? u[1] : u[i - 1];
    const double up = i == n ? u[n - 1] : u[i + 1];
    const double ri = r[i];
    const double dr = (up - um) / (2.0 * h);
    const double ddr = (up - 2.0 * u[i] + um) * inv_h2;
    const double N = std::hypot(ri, dr);
    const double kappa = (ri * ri + 2.0 * dr * dr - ri * ddr) / (N * N * N);

    const double c = std::cos(p.thetas[i]);
    const double s = std::sin(p.thetas[i]);
    const double nux = (ri * c + dr * s) / N;
    const double nuy = (ri * s - dr * c) / N;
    const bool wall_node = i == 0 || i == n;
    double rho = 0.0;
    for (const auto& a : roots) {
      const double a_phi = ri * (a.ax * c + a.ay * s);
      if (wall_node && std::abs(a_phi) < wall_tolerance * a.norm * ri) {
        rho += a.mult * (ri - ddr) / (ri * ri);
      } else {
        rho += a.mult * (a.ax * nux + a.ay * nuy) * cot_eps(a_phi, eps);
      }
    }
    f.dr[i] = dr;
    f.ddr[i] = ddr;
    f.speed[i] = N;
    f.kappa[i] = kappa;
    f.rho[i] = rho;
    f.H_mod[i] = kappa + rho;
  }
  return f;
}

double trapezoid(const std::vector<double>& g, double h) {
  double sum = 0.0;
  const std::size_t n = g.size() - 1;
  for (std::size_t i = 0; i <= n; ++i) sum += (i == 0 || i == n ? 0.5 : 1.0) * g[i];
  return sum * h;
}

bool is_terminal(ConvergenceStatus s) {
  return s == ConvergenceStatus::blow_up || s == ConvergenceStatus::left_domain;
}

}  // namespace

const std::vector<double>& RadialProfile::differencing_values() const {
  if (deviation.size() != radii.size()) return radii;
  for (std::size_t i = 0; i < radii.size(); ++i)
    if (base + deviation[i] != radii[i]) return radii;
  return deviation;
}

void RadialProfile::split_at(double new_base) {
  base = new_base;
  deviation.resize(radii.size());
  for (std::size_t i = 0; i < radii.size(); ++i) {
    deviation[i] = radii[i] - base;
    radii[i] = base + deviation[i];
  }
}

RadialProfile init_profile(const WeightedRootSystem& S, double r0, int n) {
  if (!(r0 > 0.0 && r0 < S.r_S())) throw DomainError(fmt::format("init_profile: r0 = {} outside (0, r_S)", r0));
  if (n < 16) throw std::invalid_argument("init_profile: n must be at least 16");
  const ChamberArc arc = chamber_arc(S);
  RadialProfile p;
  p.thetas.resize(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i)
    p.thetas[static_cast<std::size_t>(i)] = i == n ? arc.theta_hi : arc.theta_lo + arc.width() * i / n;
  p.radii.assign(static_cast<std::size_t>(n) + 1, r0);
  p.split_at(r0);
  return p;
}

std::vector<double> curve_curvature(const RadialProfile& p) {
  const std::size_t n = p.intervals();
  if (n < 2) throw std::invalid_argument("profile needs at least two intervals");
  const double h = p.dtheta();
  const auto& r = p.radii;
  const auto& u = p.differencing_values();
  std::vector<double> kappa(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    if (!(r[i] > 0.0)) throw std::invalid_argument("curve_curvature: radii must be positive");
    const double um = i == 0 ? u[1] : u[i - 1];
    const double up = i == n ? u[n - 1] : u[i + 1];
    const double dr = (up - um) / (2.0 * h);
    const double ddr = (up - 2.0 * u[i] + um) / (h * h);
    const double N = std::hypot(r[i], dr);
    kappa[i] = (r[i] * r[i] + 2.0 * dr * dr - r[i] * ddr) / (N * N * N);
  }
  return kappa;
}

NodeFields evaluate_fields(const WeightedRootSystem& S, const RadialProfile& profile) {
  return evaluate_fields_impl(S, profile, kWallTolerance);
}

std::vector<double> modified_H(const WeightedRootSystem& S, const RadialProfile& profile) {
  return evaluate_fields(S, profile).H_mod;
}

double arclength_average(const RadialProfile& profile, const std::vector<double>& speed,
                         const std::vector<double>& field) {
  std::vector<double> weighted(field.size());
  for (std::size_t i = 0; i < field.size(); ++i) weighted[i] = field[i] * speed[i];
  return trapezoid(weighted, profile.dtheta()) / trapezoid(speed, profile.dtheta());
}

double average_H(const WeightedRootSystem& S, const RadialProfile& profile) {
  const auto f = evaluate_fields(S, profile);
  return arclength_average(profile, f.speed, f.H_mod);
}

double enclosed_area(const RadialProfile& profile) {
  std::vector<double> r2(profile.radii.size());
  for (std::size_t i = 0; i < r2.size(); ++i) r2[i] = profile.radii[i] * profile.radii[i];
  const double copies = std::round(2.0 * std::numbers::pi / profile.arc_width());
  return copies * 0.5 * trapezoid(r2, profile.dtheta());
}

double arc_length(const RadialProfile& profile, const std::vector<double>& speed) {
  return trapezoid(speed, profile.dtheta());
}

double stable_dt(const RadialProfile& profile, double cfl) {
  const double rmin = *std::min_element(profile.radii.begin(), profile.radii.end());
  const double x = rmin * profile.dtheta();
  return cfl * x * x;
}

std::string to_string(ConvergenceStatus s) {
  switch (s) {
    case ConvergenceStatus::running: return "running";
    case ConvergenceStatus::converged: return "converged";
    case ConvergenceStatus::max_steps: return "max_steps";
    case ConvergenceStatus::blow_up: return "blow_up";
    case ConvergenceStatus::left_domain: return "left_domain";
  }
  return "running";
}

double FlowState::cmc_residual() const {
  double worst = 0.0;
  for (double h : H_mod) worst = std::max(worst, std::abs(h - H_bar));
  return worst;
}

double FlowState::max_radial_speed() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < H_mod.size(); ++i)
    worst = std::max(worst, std::abs((H_bar - H_mod[i]) * speed[i] / profile.radii[i]));
  return worst;
}

namespace {

FlowState make_state_impl(const WeightedRootSystem& S, RadialProfile profile, double t, std::int64_t step,
                          double wall_tolerance) {
  FlowState st;
  auto f = evaluate_fields_impl(S, profile, wall_tolerance);
  st.step = step;
  st.t = t;
  st.H_bar = arclength_average(profile, f.speed, f.H_mod);
  st.length = arc_length(profile, f.speed);
  st.area = enclosed_area(profile);
  st.kappa = std::move(f.kappa);
  st.rho = std::move(f.rho);
  st.H_mod = std::move(f.H_mod);
  st.speed = std::move(f.speed);
  st.profile = std::move(profile);
  return st;
}

FlowState step_impl(const WeightedRootSystem& S, const FlowState& state, double dt, double wall_tolerance) {
  RadialProfile next = state.profile;
  const bool split = &state.profile.differencing_values() == &state.profile.deviation;
  bool finite = true;
  bool inside = true;
  for (std::size_t i = 0; i < next.radii.size(); ++i) {
    const double ri = state.profile.radii[i];
    const double v = (state.H_bar - state.H_mod[i]) * state.speed[i] / ri;
    if (split) {
      next.deviation[i] = state.profile.deviation[i] + dt * v;
      next.radii[i] = next.base + next.deviation[i];
    } else {
      next.radii[i] = ri + dt * v;
    }
    finite = finite && std::isfinite(next.radii[i]);
    inside = inside && next.radii[i] > 0.0 && next.radii[i] < S.r_S();
  }
  if (!finite || !inside) {
    FlowState flagged = state;
    flagged.profile = std::move(next);
    flagged.status = finite ? ConvergenceStatus::left_domain : ConvergenceStatus::blow_up;
    return flagged;
  }
  FlowState out = make_state_impl(S, std::move(next), state.t + dt, state.step + 1, wall_tolerance);
  for (double h : out.H_mod)
    if (!std::isfinite(h)) {
      out.status = ConvergenceStatus::blow_up;
      break;
    }
  return out;
}

}  // namespace

FlowState make_state(const WeightedRootSystem& S, RadialProfile profile, double t, std::int64_t step) {
  return make_state_impl(S, std::move(profile), t, step, kWallTolerance);
}

FlowState step(const WeightedRootSystem& S, const FlowState& state, double dt) {
  return step_impl(S, state, dt, kWallTolerance);
}

void FlowConfig::validate(const WeightedRootSystem& S) const {
  if (S.rank() != 2) throw std::invalid_argument("flow: only rank-2 systems are supported");
  if (n < 16) throw std::invalid_argument("flow.n: must be at least 16");
  if (!(r0 > 0.0 && r0 < S.r_S())) throw std::invalid_argument(fmt::format("flow.r0: {} outside (0, r_S = {})", r0, S.r_S()));
  // cfl above 0.5 is accepted so that unstable regimes can be observed.
  if (!(cfl > 0.0)) throw std::invalid_argument("flow.cfl: must be positive");
  if (!(tol_cmc > 0.0)) throw std::invalid_argument("flow.tol_cmc: must be positive");
  if (!(tol_rate > 0.0)) throw std::invalid_argument("flow.tol_rate: must be positive");
  if (max_steps < 0) throw std::invalid_argument("flow.max_steps: must be nonnegative");
  if (sample_every < 1) throw std::invalid_argument("flow.sample_every: must be at least 1");
  if (!(wall_tolerance > 0.0)) throw std::invalid_argument("flow.wall_tolerance: must be positive");
}

Trajectory run_flow(const WeightedRootSystem& S, const FlowConfig& config) {
  config.validate(S);
  return run_flow_from(S, init_profile(S, config.r0, config.n), config);
}

Trajectory run_flow_from(const WeightedRootSystem& S, const RadialProfile& start, const FlowConfig& config) {
  Trajectory traj;
  RadialProfile first = start;
  if (&first.differencing_values() != &first.deviation) first.split_at(first.radii.front());
  FlowState state = make_state_impl(S, std::move(first), 0.0, 0, config.wall_tolerance);
  const double area0 = state.area;

  auto& ex = traj.extremes;
  ex.min_kappa = *std::min_element(state.kappa.begin(), state.kappa.end());
  ex.min_radius = *std::min_element(state.profile.radii.begin(), state.profile.radii.end());
  ex.max_radius = *std::max_element(state.profile.radii.begin(), state.profile.radii.end());
  ex.min_H_mod = *std::min_element(state.H_mod.begin(), state.H_mod.end());
  ex.max_H_mod = *std::max_element(state.H_mod.begin(), state.H_mod.end());
  auto absorb = [&](const FlowState& s) {
    for (double k : s.kappa) ex.min_kappa = std::min(ex.min_kappa, k);
    for (double r : s.profile.radii) {
      ex.min_radius = std::min(ex.min_radius, r);
      ex.max_radius = std::max(ex.max_radius, r);
    }
    for (double h : s.H_mod) {
      ex.min_H_mod = std::min(ex.min_H_mod, h);
      ex.max_H_mod = std::max(ex.max_H_mod, h);
    }
    ex.max_area_drift = std::max(ex.max_area_drift, std::abs(s.area - area0) / area0);
  };
  auto converged = [&](const FlowState& s) {
    const double scale = std::abs(s.H_bar);
    return s.cmc_residual() < config.tol_cmc * scale && s.max_radial_speed() < config.tol_rate * scale;
  };

  traj.states.push_back(state);
  if (converged(state)) {
    traj.status = ConvergenceStatus::converged;
  } else {
    for (std::int64_t k = 1; k <= config.max_steps; ++k) {
      FlowState next = step_impl(S, state, stable_dt(state.profile, config.cfl), config.wall_tolerance);
      if (is_terminal(next.status)) {
        traj.status = next.status;
        break;
      }
      state = std::move(next);
      absorb(state);
      const bool done = converged(state);
      if (k % config.sample_every == 0 || done) traj.states.push_back(state);
      if (done) {
        traj.status = ConvergenceStatus::converged;
        break;
      }
    }
  }
  if (traj.status == ConvergenceStatus::running) traj.status = ConvergenceStatus::max_steps;
  if (traj.states.back().step != state.step) traj.states.push_back(state);
  traj.steps = state.step;
  traj.states.back().status = traj.status;
  return traj;
}

std::vector<Vec> full_orbit_curve(const WeightedRootSystem& S, const WeylGroup& W, const RadialProfile& profile) {
  if (S.rank() != 2) throw std::invalid_argument("full_orbit_curve: rank-2 systems only");
  std::vector<Vec> pts;
  pts.reserve(W.order() * profile.radii.size());
  for (const Mat& w : W.elements)
    for (std::size_t i = 0; i < profile.radii.size(); ++i) {
      Vec p(2);
      p << profile.radii[i] * std::cos(profile.thetas[i]), profile.radii[i] * std::sin(profile.thetas[i]);
      pts.push_back(w * p);
    }
  std::sort(pts.begin(), pts.end(),
            [](const Vec& a, const Vec& b) { return std::atan2(a[1], a[0]) < std::atan2(b[1], b[0]); });
  const double scale = *std::max_element(profile.radii.begin(), profile.radii.end());
  std::vector<Vec> out;
  for (const Vec& p : pts)
    if (out.empty() || (p - out.back()).norm() > 1e-12 * scale) out.push_back(p);
  if (out.size() > 1 && (out.front() - out.back()).norm() <= 1e-12 * scale) out.pop_back();
  return out;
}

nlohmann::json to_json(const FlowConfig& c) {
  return {{"n", c.n},
          {"r0", c.r0},
          {"cfl", c.cfl},
          {"tol_cmc", c.tol_cmc},
          {"tol_rate", c.tol_rate},
          {"max_steps", c.max_steps},
          {"sample_every", c.sample_every},
          {"wall_tolerance", c.wall_tolerance}};
}

FlowConfig flow_config_from_json(const nlohmann::json& j, const WeightedRootSystem& S) {
  if (!j.is_object()) throw std::invalid_argument("flow: expected a JSON object");
  static const std::vector<std::string> allowed{"n", "r0", "r0_fraction", "cfl", "tol_cmc", "tol_rate",
                                                "max_steps", "sample_every", "wall_tolerance"};
  for (const auto& [key, _] : j.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw std::invalid_argument(fmt::format("flow.{}: unknown key", key));
  auto number = [&j](const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) throw std::invalid_argument(fmt::format("flow.{}: expected a number", key));
    return j.at(key).get<double>();
  };
  auto integer = [&j](const char* key, std::int64_t fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number_integer()) throw std::invalid_argument(fmt::format("flow.{}: expected an integer", key));
    return j.at(key).get<std::int64_t>();
  };
  FlowConfig c;
  c.n = static_cast<int>(integer("n", c.n));
  if (j.contains("r0") && j.contains("r0_fraction"))
    throw std::invalid_argument("flow: give either r0 or r0_fraction, not both");
  c.r0 = j.contains("r0_fraction") ? number("r0_fraction", 0.0) * S.natural_radius() : number("r0", c.r0);
  c.cfl = number("cfl", c.cfl);
  c.tol_cmc = number("tol_cmc", c.tol_cmc);
  c.tol_rate = number("tol_rate", c.tol_cmc);
  c.max_steps = integer("max_steps", c.max_steps);
  c.sample_every = integer("sample_every", c.sample_every);
  c.wall_tolerance = number("wall_tolerance", c.wall_tolerance);
  c.validate(S);
  return c;
}

}  // namespace weylflow
