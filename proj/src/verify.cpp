#include "weylflow/verify.hpp"

#include "weylflow/curvature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

namespace weylflow {

std::string to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::inconclusive: return "inconclusive";
    case CheckStatus::skipped: return "skipped";
  }
  return "fail";
}

CheckStatus check_status_from_string(const std::string& s) {
  if (s == "pass") return CheckStatus::pass;
  if (s == "fail") return CheckStatus::fail;
  if (s == "inconclusive") return CheckStatus::inconclusive;
  if (s == "skipped") return CheckStatus::skipped;
  throw std::invalid_argument(fmt::format("unknown check status '{}'", s));
}

void VerifyReport::add(Check c) {
  if (c.name.empty()) throw std::invalid_argument("verify report: check without a name");
  if (c.claim.empty()) throw std::invalid_argument(fmt::format("verify report: check '{}' states no claim", c.name));
  for (const auto& existing : checks_)
    if (existing.name == c.name) throw std::invalid_argument(fmt::format("verify report: duplicate check '{}'", c.name));
  checks_.push_back(std::move(c));
}

const Check& VerifyReport::at(const std::string& name) const {
  for (const auto& c : checks_)
    if (c.name == name) return c;
  throw std::out_of_range(fmt::format("verify report: no check named '{}'", name));
}

bool VerifyReport::any_failed() const {
  return std::any_of(checks_.begin(), checks_.end(), [](const Check& c) { return c.status == CheckStatus::fail; });
}

bool VerifyReport::any_inconclusive() const {
  return std::any_of(checks_.begin(), checks_.end(),
                     [](const Check& c) { return c.status == CheckStatus::inconclusive; });
}

nlohmann::json VerifyReport::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& c : checks_)
    j[c.name] = {{"pass", c.passed()},     {"status", to_string(c.status)}, {"measured", c.measured},
                 {"bound", c.bound},       {"tolerance", c.tolerance},      {"claim", c.claim},
                 {"note", c.note}};
  return j;
}

VerifyReport VerifyReport::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("verify report: expected a JSON object");
  VerifyReport r;
  for (const auto& [name, v] : j.items()) {
    Check c;
    c.name = name;
    c.status = check_status_from_string(v.at("status").get<std::string>());
    if (v.at("pass").get<bool>() != c.passed())
      throw std::invalid_argument(fmt::format("verify report: '{}' has inconsistent pass and status", name));
    c.measured = v.at("measured");
    c.bound = v.at("bound");
    c.tolerance = v.at("tolerance").get<double>();
    c.claim = v.at("claim").get<std::string>();
    c.note = v.value("note", "");
    r.add(std::move(c));
  }
  return r;
}

namespace {

CheckStatus verdict(bool ok) { return ok ? CheckStatus::pass : CheckStatus::fail; }

// Even extension of a nodal field across both walls.
double reflected(const std::vector<double>& f, std::ptrdiff_t j) {
  const auto n = static_cast<std::ptrdiff_t>(f.size()) - 1;
  if (j < 0) j = -j;
  if (j > n) j = 2 * n - j;
  return f[static_cast<std::size_t>(j)];
}

struct Extremum {
  double theta;
  bool is_max;
};

// Local extrema of a nodal field on the chamber arc, located to sub-grid
// accuracy by the vertex of the parabola through three nodes.
std::vector<Extremum> locate_extrema(const RadialProfile& p, const std::vector<double>& f) {
  const auto n = static_cast<std::ptrdiff_t>(f.size()) - 1;
  const double h = p.dtheta();
  std::vector<Extremum> out;
  for (std::ptrdiff_t j = 0; j <= n; ++j) {
    const double a = reflected(f, j - 1), b = reflected(f, j), c = reflected(f, j + 1);
    const bool is_max = b > a && b >= c;
    const bool is_min = b < a && b <= c;
    if (!is_max && !is_min) continue;
    const double curv = a - 2.0 * b + c;
    const double offset = curv != 0.0 ? 0.5 * h * (a - c) / curv : 0.0;
    const double theta = p.thetas.front() + static_cast<double>(j) * h + std::clamp(offset, -h, h);
    out.push_back({std::clamp(theta, p.thetas.front(), p.thetas.back()), is_max});
  }
  return out;
}

// Size of H_mod differences that the second difference quotient cannot
// resolve: round-off in r'' is about 4 eps |u| / dtheta^2 for the differenced
// values u, and enters the curvature divided by r^2.
double resolution_floor(const FlowState& s) {
  const double h = s.profile.dtheta();
  double umax = 0.0, hmax = 0.0;
  for (double u : s.profile.differencing_values()) umax = std::max(umax, std::abs(u));
  for (double v : s.H_mod) hmax = std::max(hmax, std::abs(v));
  const double rmin = *std::min_element(s.profile.radii.begin(), s.profile.radii.end());
  return 1e3 * std::numeric_limits<double>::epsilon() * (umax / (h * h * rmin * rmin) + hmax);
}

double spread(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi - *lo;
}

bool terminal(ConvergenceStatus s) { return s == ConvergenceStatus::blow_up || s == ConvergenceStatus::left_domain; }

}  // namespace

Check check_annulus(const RadialProfile& profile, double r, double theta, const std::string& name) {
  Check c;
  c.name = name;
  c.claim = "the converged curve lies in the annulus r cos(theta) <= |phi| <= r / cos(theta)";
  c.tolerance = 1e-3 * r;
  const double lo = r * std::cos(theta);
  const double hi = r / std::cos(theta);
  const auto [mn, mx] = std::minmax_element(profile.radii.begin(), profile.radii.end());
  c.measured = {{"min_radius", *mn}, {"max_radius", *mx}};
  c.bound = {{"inner", lo}, {"outer", hi}, {"theta", theta}};
  c.status = verdict(*mn >= lo - c.tolerance && *mx <= hi + c.tolerance);
  c.note = "scheme-error budget: radii carry O(dtheta^2) error";
  return c;
}

Check check_eta_sandwich(const WeightedRootSystem& S, double r, double H_final, int n_samples) {
  Check c;
  c.name = "eta_sandwich";
  c.claim = "the constant modified curvature lies between the extremes of the geodesic sphere curvature at radius r";
  c.tolerance = 1e-3 * std::abs(H_final);
  const EtaBounds eta = eta_bounds(S, r, std::max(n_samples, 10000));
  c.measured = H_final;
  c.bound = {{"eta_min", eta.eta_min}, {"eta_max", eta.eta_max}, {"radius", r}};
  c.status = verdict(H_final >= eta.eta_min - c.tolerance && H_final <= eta.eta_max + c.tolerance);
  c.note = "scheme-error budget";
  return c;
}

Check check_max_principle(const Trajectory& traj) {
  Check c;
  c.name = "max_principle";
  c.claim = "min H_mod(0) <= H_mod(t) <= max H_mod(0) for all t";
  const auto& h0 = traj.initial().H_mod;
  const auto [lo0, hi0] = std::minmax_element(h0.begin(), h0.end());
  const double delta = 1e-4 * (*hi0 - *lo0) + 1e-10;
  double lo = *lo0, hi = *hi0;
  for (const auto& s : traj.states)
    for (double h : s.H_mod) {
      lo = std::min(lo, h);
      hi = std::max(hi, h);
    }
  c.tolerance = delta;
  c.measured = {{"min", lo}, {"max", hi}};
  c.bound = {{"min0", *lo0}, {"max0", *hi0}};
  c.status = verdict(lo >= *lo0 - delta && hi <= *hi0 + delta);
  c.note = "scheme-error budget: 1e-4 of the initial spread plus 1e-10";
  return c;
}

Check check_convexity(const Trajectory& traj) {
  Check c;
  c.name = "convexity";
  c.claim = "the evolving curves remain strictly convex";
  double worst = std::numeric_limits<double>::infinity();
  std::int64_t violations = 0;
  for (const auto& s : traj.states)
    for (double k : s.kappa) {
      worst = std::min(worst, k);
      if (!(k > 0.0)) ++violations;
    }
  c.measured = {{"min_kappa", worst}, {"violations", violations}};
  c.bound = 0.0;
  c.status = verdict(violations == 0);
  c.note = "exact sign test";
  return c;
}

Check check_domain(const WeightedRootSystem& S, const Trajectory& traj) {
  Check c;
  c.name = "domain";
  c.claim = "the evolving curves stay inside the ball of radius r_S";
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  std::int64_t violations = 0;
  for (const auto& s : traj.states)
    for (double r : s.profile.radii) {
      lo = std::min(lo, r);
      hi = std::max(hi, r);
      if (!(r > 0.0 && r < S.r_S())) ++violations;
    }
  c.measured = {{"min_radius", lo}, {"max_radius", hi}, {"violations", violations}};
  c.bound = std::isfinite(S.r_S()) ? nlohmann::json(S.r_S()) : nlohmann::json("inf");
  c.status = verdict(violations == 0 && !terminal(traj.status));
  c.note = "exact containment test";
  return c;
}

Check check_volume(const Trajectory& traj) {
  Check c;
  c.name = "volume";
  c.claim = "the enclosed area is preserved";
  const double a0 = traj.initial().area;
  double drift = 0.0;
  for (const auto& s : traj.states) drift = std::max(drift, std::abs(s.area - a0) / a0);
  drift = std::max(drift, traj.extremes.max_area_drift);
  c.tolerance = 1e-4;
  c.measured = drift;
  c.bound = 1e-4;
  c.status = verdict(drift < 1e-4);
  c.note = "drift budget: first order in dt times the step count";
  return c;
}

Check check_ray_invariance(const Trajectory& traj) {
  Check c;
  c.name = "ray_invariance";
  c.claim = "maximum and minimum points of the modified curvature stay on their initial rays";
  const FlowState& s0 = traj.initial();
  const double h = s0.profile.dtheta();
  c.tolerance = 1.5 * h;
  c.bound = 1.5 * h;
  if (spread(s0.H_mod) <= resolution_floor(s0)) {
    c.status = CheckStatus::skipped;
    c.measured = nullptr;
    c.note = "initial modified curvature is constant to round-off";
    return c;
  }
  const auto initial = locate_extrema(s0.profile, s0.H_mod);
  double drift = 0.0;
  int used = 0, excluded = 0;
  for (const auto& s : traj.states) {
    if (spread(s.H_mod) <= resolution_floor(s)) {
      ++excluded;
      continue;
    }
    ++used;
    const auto now = locate_extrema(s.profile, s.H_mod);
    for (const auto& e : initial) {
      double nearest = std::numeric_limits<double>::infinity();
      for (const auto& f : now)
        if (f.is_max == e.is_max) nearest = std::min(nearest, std::abs(f.theta - e.theta));
      drift = std::max(drift, nearest);
    }
  }
  nlohmann::json where = nlohmann::json::array();
  for (const auto& e : initial) where.push_back({{"theta", e.theta}, {"type", e.is_max ? "max" : "min"}});
  c.measured = {{"max_drift", drift}, {"extrema", where}, {"states_used", used}, {"states_excluded", excluded}};
  c.status = verdict(drift < 1.5 * h);
  c.note = "scheme-error budget: 1.5 grid spacings; states below the round-off floor are excluded";
  return c;
}

double evolution_coefficient(const WeightedRootSystem& S, const Vec& phi, const Vec& nu, double kappa,
                             EvolutionForm form) {
  const int eps = S.epsilon();
  double sum = 0.0;
  for (std::size_t i = 0; i < S.positive_roots().size(); ++i) {
    const int m = S.multiplicities()[i];
    if (m == 0) continue;
    const auto& a = S.positive_roots()[i];
    const double x = a(phi);
    const double an = a(nu);
    if (x == 0.0) throw DomainError("evolution_coefficient: phi lies on a wall");
    if (eps == 1) {
      const double s2 = std::sin(x) * std::sin(x);
      const double c2 = std::cos(x) * std::cos(x);
      sum += m * an * an * (form == EvolutionForm::stated ? (3.0 * c2 - 1.0) / s2 : 1.0 / s2);
    } else {
      const double s2 = std::sinh(x) * std::sinh(x);
      const double c2 = std::cosh(x) * std::cosh(x);
      sum += m * an * an * (form == EvolutionForm::stated ? (3.0 * c2 - 1.0) / s2 : 1.0 / s2);
    }
  }
  return form == EvolutionForm::stated ? sum : -(kappa * kappa + sum);
}

ResidualStats hs_evolution_residual(const WeightedRootSystem& S, const Trajectory& traj, EvolutionForm form) {
  const auto& st = traj.states;
  if (st.size() < 3) throw std::invalid_argument("hs_evolution_residual: window too short (need 3 states)");
  for (std::size_t k = 1; k < st.size(); ++k)
    if (st[k].step != st[k - 1].step + 1)
      throw std::invalid_argument("hs_evolution_residual: states must be sampled at consecutive steps");

  const int eps = S.epsilon();
  ResidualStats out;
  for (std::size_t k = 1; k + 1 < st.size(); ++k) {
    const FlowState& s = st[k];
    const auto& p = s.profile;
    const std::size_t n = p.intervals();
    const double h = p.dtheta();
    const double dt2 = st[k + 1].t - st[k - 1].t;
    const auto& H = s.H_mod;
    const auto& r = p.radii;
    const auto& u = p.differencing_values();
    for (std::size_t i = 1; i < n; ++i) {
      const double dr = (u[i + 1] - u[i - 1]) / (2.0 * h);
      const double N = s.speed[i];
      const double dN = (s.speed[i + 1] - s.speed[i - 1]) / (2.0 * h);
      const double dH = (H[i + 1] - H[i - 1]) / (2.0 * h);
      const double ddH = (H[i + 1] - 2.0 * H[i] + H[i - 1]) / (h * h);
      const double H_ss = ddH / (N * N) - dH * dN / (N * N * N);

      const double f = s.H_bar - H[i];
      // Material points move normally; at fixed angle they drift by omega.
      const double omega = -f * dr / (N * r[i]);
      const double dH_dt = (st[k + 1].H_mod[i] - st[k - 1].H_mod[i]) / dt2 + omega * dH;

      const double c = std::cos(p.thetas[i]), sn = std::sin(p.thetas[i]);
      Vec phi(2), nu(2), phi_theta(2);
      phi << r[i] * c, r[i] * sn;
      nu << (r[i] * c + dr * sn) / N, (r[i] * sn - dr * c) / N;
      phi_theta << dr * c - r[i] * sn, dr * sn + r[i] * c;

      double grad = 0.0;
      for (std::size_t a = 0; a < S.positive_roots().size(); ++a) {
        const int m = S.multiplicities()[a];
        if (m == 0) continue;
        const auto& alpha = S.positive_roots()[a];
        grad += m * cot_eps(alpha(phi), eps) * alpha(phi_theta) * dH / (N * N);
      }
      const double lhs = dH_dt - H_ss;
      const double rhs = grad + f * evolution_coefficient(S, phi, nu, s.kappa[i], form);
      out.max_residual = std::max(out.max_residual, std::abs(lhs - rhs));
      out.max_lhs = std::max(out.max_lhs, std::abs(lhs));
    }
    ++out.states_used;
  }
  return out;
}

Check check_hs_evolution_residual(const WeightedRootSystem& S, const FlowConfig& coarse, int window,
                                  EvolutionForm form) {
  if (window < 3) throw std::invalid_argument("check_hs_evolution_residual: window too short");
  auto windowed = [&](int n, std::int64_t steps) {
    FlowConfig c = coarse;
    c.n = n;
    c.max_steps = steps;
    c.sample_every = 1;
    c.tol_cmc = std::numeric_limits<double>::min();
    c.tol_rate = std::numeric_limits<double>::min();
    return run_flow(S, c);
  };
  // Same physical time at both resolutions: dt scales with dtheta^2.
  const Trajectory t1 = windowed(coarse.n, window);
  const Trajectory t2 = windowed(2 * coarse.n, 4 * static_cast<std::int64_t>(window));

  Check c;
  c.name = form == EvolutionForm::stated ? "hs_evolution_residual" : "hs_evolution_residual_corrected";
  c.claim = form == EvolutionForm::stated
                ? "the modified curvature obeys the stated evolution law"
                : "the modified curvature obeys the evolution law including the |A|^2 term";
  c.tolerance = 2.0;
  c.bound = {{"min_ratio", 2.0}, {"min_order", 1.0}};
  if (terminal(t1.status) || terminal(t2.status) || t1.states.size() < 3 || t2.states.size() < 3) {
    c.status = CheckStatus::inconclusive;
    c.measured = {{"status_coarse", to_string(t1.status)}, {"status_fine", to_string(t2.status)}};
    c.note = "a refinement run did not complete the window";
    return c;
  }
  const auto r1 = hs_evolution_residual(S, t1, form);
  const auto r2 = hs_evolution_residual(S, t2, form);
  const double ratio = r2.max_residual > 0.0 ? r1.max_residual / r2.max_residual
                                             : (r1.max_residual > 0.0 ? std::numeric_limits<double>::infinity() : 1.0);
  const double order = std::log2(ratio);
  c.measured = {{"residual_coarse", r1.max_residual}, {"residual_fine", r2.max_residual},
                {"lhs_scale_coarse", r1.max_lhs},     {"lhs_scale_fine", r2.max_lhs},
                {"ratio", ratio},                     {"order", order},
                {"n_coarse", coarse.n},               {"n_fine", 2 * coarse.n},
                {"t_window_coarse", t1.final().t},    {"t_window_fine", t2.final().t}};
  if (r1.max_residual == 0.0 && r2.max_residual == 0.0) {
    c.status = CheckStatus::pass;
    c.note = "both sides vanish identically";
  } else {
    c.status = verdict(ratio >= 2.0 && order >= 1.0);
    c.note = "scheme-error budget: residual must shrink at first order or better";
  }
  return c;
}

Check check_h_monotone(const WeightedRootSystem& S, const std::vector<double>& radii, const FlowConfig& base) {
  if (radii.size() < 3) throw std::invalid_argument("check_h_monotone: need at least 3 radii");
  for (double r : radii)
    if (S.epsilon() == 1 && !(r < S.r_S() / 8.0))
      throw std::invalid_argument(fmt::format("check_h_monotone: radius {} not below r_S / 8", r));

  Check c;
  c.name = "h_monotone";
  c.claim = "the constant modified curvature H(r) is strictly decreasing in r";
  c.tolerance = 1e-6;
  nlohmann::json values = nlohmann::json::array();
  bool all_converged = true;
  std::vector<double> H;
  for (double r : radii) {
    FlowConfig cfg = base;
    cfg.r0 = r;
    const Trajectory t = run_flow(S, cfg);
    all_converged = all_converged && t.status == ConvergenceStatus::converged;
    H.push_back(t.final().H_bar);
    values.push_back({{"r", r}, {"H_bar", t.final().H_bar}, {"status", to_string(t.status)}, {"steps", t.steps}});
  }
  double worst_margin = std::numeric_limits<double>::infinity();
  bool decreasing = true;
  for (std::size_t k = 0; k + 1 < H.size(); ++k) {
    const double margin = (H[k] - H[k + 1]) / std::abs(H[k]);
    worst_margin = std::min(worst_margin, margin);
    decreasing = decreasing && margin > 1e-6;
  }
  c.measured = {{"runs", values}, {"worst_relative_margin", worst_margin}};
  c.bound = 1e-6;
  if (!all_converged) {
    c.status = CheckStatus::inconclusive;
    c.note = "at least one run did not converge";
  } else {
    c.status = verdict(decreasing);
    c.note = "relative margin 1e-6 between consecutive radii";
  }
  return c;
}

Check check_b_window(const WeightedRootSystem& S, double r, double H_final, double rel_tol) {
  Check c;
  c.name = "b_window";
  c.claim = "for large r, H(r) - (l - 1)/r approaches the window [b_min, b_max]";
  const Limits b = b_limits(S);
  const double measured = H_final - (S.rank() - 1) / r;
  c.tolerance = rel_tol * b.b_max;
  c.measured = {{"H_minus_sphere_term", measured}, {"radius", r}};
  c.bound = {{"b_min", b.b_min}, {"b_max", b.b_max}};
  c.status = verdict(measured >= b.b_min - c.tolerance && measured <= b.b_max + c.tolerance);
  c.note = "asymptotic statement checked loosely at one finite radius, inclusion only";
  return c;
}

}  // namespace weylflow
