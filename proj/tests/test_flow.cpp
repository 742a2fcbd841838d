#include "weylflow/curvature.hpp"
#include "weylflow/flow.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace weylflow;

namespace {

WeightedRootSystem a2(int eps = 1, int m = 1, bool test_mode = false) {
  return build_system(Family::a, 2, std::vector<int>{m}, eps, test_mode);
}

Vec dir(double theta) {
  Vec z(2);
  z << std::cos(theta), std::sin(theta);
  return z;
}

// r = R (1 + a cos(k (theta - theta_lo))), even about both a2 walls for k = 6.
struct Wavy {
  double R, a, k, theta_lo;
  double r(double t) const { return R * (1.0 + a * std::cos(k * (t - theta_lo))); }
  double dr(double t) const { return -R * a * k * std::sin(k * (t - theta_lo)); }
  double ddr(double t) const { return -R * a * k * k * std::cos(k * (t - theta_lo)); }
  double kappa(double t) const {
    const double N = std::hypot(r(t), dr(t));
    return (r(t) * r(t) + 2 * dr(t) * dr(t) - r(t) * ddr(t)) / (N * N * N);
  }
  Vec normal(double t) const {
    const double N = std::hypot(r(t), dr(t));
    Vec nu(2);
    nu << (r(t) * std::cos(t) + dr(t) * std::sin(t)) / N, (r(t) * std::sin(t) - dr(t) * std::cos(t)) / N;
    return nu;
  }
};

RadialProfile sample(const WeightedRootSystem& S, const Wavy& w, int n) {
  RadialProfile p = init_profile(S, w.R, n);
  for (std::size_t i = 0; i < p.radii.size(); ++i) p.radii[i] = w.r(p.thetas[i]);
  return p;
}

}  // namespace

TEST_CASE("round profile: curvature, area, length") {
  const auto S = a2();
  const auto p = init_profile(S, 0.3, 64);
  CHECK(p.thetas.front() == doctest::Approx(chamber_arc(S).theta_lo));
  CHECK(p.arc_width() == doctest::Approx(std::numbers::pi / 3).epsilon(1e-15));
  for (double k : curve_curvature(p)) CHECK(k == doctest::Approx(1.0 / 0.3).epsilon(1e-14));
  CHECK(enclosed_area(p) == doctest::Approx(std::numbers::pi * 0.09).epsilon(1e-14));
  const auto f = evaluate_fields(S, p);
  CHECK(arc_length(p, f.speed) == doctest::Approx(0.3 * std::numbers::pi / 3).epsilon(1e-14));
  CHECK(stable_dt(p, 0.25) == doctest::Approx(0.25 * std::pow(0.3 * p.dtheta(), 2)));
  CHECK_THROWS_AS(init_profile(S, 0.3, 8), std::invalid_argument);
  CHECK_THROWS_AS(init_profile(S, 3.0, 64), DomainError);
}

TEST_CASE("modified curvature of a round profile equals the sphere formula") {
  for (int eps : {1, -1}) {
    const auto S = build_system(Family::g2, 2, std::vector<int>{1, 2}, eps);
    const double r = 0.2;
    const auto p = init_profile(S, r, 64);
    const auto H = modified_H(S, p);
    for (std::size_t i = 0; i < p.radii.size(); ++i)
      CHECK(H[i] == doctest::Approx(sphere_H(S, r, dir(p.thetas[i])).H).epsilon(1e-12));
  }
}

TEST_CASE("polar curvature converges at second order against the analytic value") {
  const auto S = a2();
  const Wavy w{0.5, 0.05, 6.0, chamber_arc(S).theta_lo};
  auto err = [&](int n) {
    const auto p = sample(S, w, n);
    const auto k = curve_curvature(p);
    double e = 0.0;
    for (std::size_t i = 0; i < p.radii.size(); ++i) e = std::max(e, std::abs(k[i] - w.kappa(p.thetas[i])));
    return e;
  };
  const double ratio = err(64) / err(128);
  CHECK(ratio > 3.8);
  CHECK(ratio < 4.2);
}

TEST_CASE("wall node term is the limit of the interior term along the curve") {
  const auto S = a2();
  const auto arc = chamber_arc(S);
  const Wavy w{0.5, 0.05, 6.0, arc.theta_lo};
  const auto p = sample(S, w, 4096);
  const auto f = evaluate_fields(S, p);
  const double t = arc.theta_lo + 1e-6;
  const double interior = rho_point(S, w.r(t) * dir(t), w.normal(t));
  CHECK(std::abs(f.rho[0] - interior) / interior < 1e-5);
  // The round-sphere value m / r misses the -r'' / r^2 contribution.
  const double r0 = p.radii[0];
  const double naive = f.rho[0] - (r0 - f.ddr[0]) / (r0 * r0) + 1.0 / r0;
  CHECK(std::abs(naive - interior) > 1e3 * std::abs(f.rho[0] - interior));
}

TEST_CASE("normal motion seen at fixed angle has speed f |phi_theta| / r") {
  // Material points moving with normal speed f change their own radius at
  // rate f <nu, e_r> = f r / N; at fixed angle the tangential drift adds
  // f r'^2 / (N r), giving f N / r.
  const auto S = a2();
  const Wavy w{0.5, 0.08, 6.0, chamber_arc(S).theta_lo};
  const double t0 = w.theta_lo + 0.37;
  auto f = [](double t) { return 1.0 + 0.3 * std::sin(3.0 * t); };
  const double delta = 1e-7;
  auto moved = [&](double t) -> Vec { return w.r(t) * dir(t) + delta * f(t) * w.normal(t); };
  // Find the material parameter whose moved point lies on the ray t0.
  double lo = t0 - 0.01, hi = t0 + 0.01;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const Vec q = moved(mid);
    (std::atan2(q[1], q[0]) < t0 ? lo : hi) = mid;
  }
  const double fixed_angle_rate = (moved(0.5 * (lo + hi)).norm() - w.r(t0)) / delta;
  const double N = std::hypot(w.r(t0), w.dr(t0));
  CHECK(fixed_angle_rate == doctest::Approx(f(t0) * N / w.r(t0)).epsilon(1e-5));
  const double material_rate = (moved(t0).norm() - w.r(t0)) / delta;
  CHECK(material_rate == doctest::Approx(f(t0) * w.r(t0) / N).epsilon(1e-5));
  CHECK(std::abs(fixed_angle_rate - material_rate) > 1e-3);
}

TEST_CASE("zero multiplicities: the round circle is a fixed point") {
  const auto S = a2(1, 0, true);
  FlowConfig c;
  c.r0 = 0.1;
  const auto t = run_flow(S, c);
  CHECK(t.status == ConvergenceStatus::converged);
  CHECK(t.steps == 0);
  CHECK(t.final().H_bar == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("area is conserved up to first-order time error") {
  const auto S = a2(-1);
  const auto run = [&](double cfl, std::int64_t steps) {
    FlowConfig c;
    c.n = 64;
    c.r0 = 2.0;
    c.cfl = cfl;
    c.max_steps = steps;
    c.tol_cmc = c.tol_rate = 1e-300;
    return run_flow(S, c);
  };
  const auto fine = run(0.1, 400);
  const auto coarse = run(0.2, 200);
  const double d1 = fine.extremes.max_area_drift;
  const double d2 = coarse.extremes.max_area_drift;
  CHECK(d1 > 0.0);
  CHECK(d2 / d1 == doctest::Approx(2.0).epsilon(0.1));
  CHECK(d2 < 1e-4);
}

TEST_CASE("deformed run converges to a constant modified curvature") {
  const auto S = a2(-1);
  FlowConfig c;
  c.n = 32;
  c.r0 = 2.0;
  c.tol_cmc = c.tol_rate = 1e-9;
  c.sample_every = 100;
  const auto t = run_flow(S, c);
  REQUIRE(t.status == ConvergenceStatus::converged);
  CHECK(t.final().cmc_residual() < 1e-9 * t.final().H_bar);
  CHECK(t.extremes.min_kappa > 0.0);
  CHECK(t.initial().cmc_residual() > 1e3 * t.final().cmc_residual());
  CHECK(t.states.front().step == 0);
  CHECK(t.states.back().step == t.steps);
  // H_bar decreases towards the limit and stays inside the initial range.
  CHECK(t.final().H_bar >= t.extremes.min_H_mod);
  CHECK(t.final().H_bar <= t.extremes.max_H_mod);
}

TEST_CASE("runs are deterministic") {
  const auto S = build_system(Family::b, 2, std::vector<int>{1, 1}, -1);
  FlowConfig c;
  c.n = 32;
  c.r0 = 1.5;
  c.max_steps = 500;
  c.sample_every = 50;
  const auto a = run_flow(S, c);
  const auto b = run_flow(S, c);
  REQUIRE(a.states.size() == b.states.size());
  for (std::size_t k = 0; k < a.states.size(); ++k) {
    CHECK(a.states[k].profile.radii == b.states[k].profile.radii);
    CHECK(a.states[k].H_bar == b.states[k].H_bar);
  }
}

TEST_CASE("large time steps are flagged, not hidden") {
  const auto S = a2(-1);
  FlowConfig c;
  c.n = 64;
  c.r0 = 2.0;
  c.cfl = 4.0;
  c.max_steps = 10000;
  const auto t = run_flow(S, c);
  const bool flagged = t.status == ConvergenceStatus::blow_up || t.status == ConvergenceStatus::left_domain;
  CHECK(flagged);
  CHECK(t.final().status == t.status);
  CHECK(t.steps < 10000);
}

TEST_CASE("full orbit curve is W-invariant") {
  const auto S = build_system(Family::g2, 2, std::vector<int>{1, 1}, -1);
  const auto W = weyl_group(S);
  FlowConfig c;
  c.n = 32;
  c.r0 = 1.0;
  c.max_steps = 200;
  const auto t = run_flow(S, c);
  const auto pts = full_orbit_curve(S, W, t.final().profile);
  CHECK(pts.size() == 12 * 32);
  for (const auto& w : W.elements)
    for (const auto& p : pts) {
      double best = 1e300;
      for (const auto& q : pts) best = std::min(best, (w * p - q).norm());
      CHECK(best < 1e-12);
    }
}

TEST_CASE("flow configuration from JSON") {
  const auto S = a2();
  const auto c = flow_config_from_json(nlohmann::json::parse(R"({"n": 64, "r0_fraction": 0.05, "tol_cmc": 1e-8})"), S);
  CHECK(c.n == 64);
  CHECK(c.r0 == doctest::Approx(0.05 * S.r_S()));
  CHECK(c.tol_rate == 1e-8);
  CHECK_THROWS_WITH_AS(flow_config_from_json(nlohmann::json::parse(R"({"dt": 1})"), S),
                       doctest::Contains("flow.dt"), std::invalid_argument);
  CHECK_THROWS_AS(flow_config_from_json(nlohmann::json::parse(R"({"r0": 5})"), S), std::invalid_argument);
  CHECK_THROWS_AS(flow_config_from_json(nlohmann::json::parse(R"({"n": 4})"), S), std::invalid_argument);
  CHECK_THROWS_AS(flow_config_from_json(nlohmann::json::parse(R"({"cfl": 0})"), S), std::invalid_argument);
  const auto back = flow_config_from_json(to_json(c), S);
  CHECK(back.r0 == c.r0);
  CHECK(back.max_steps == c.max_steps);
}

TEST_CASE("split radii: curvature of a nearly round profile is taken from the deviation") {
  const auto S = a2();
  const auto arc = chamber_arc(S);
  const Wavy w{0.1, 1e-10, 6.0, arc.theta_lo};
  auto p = init_profile(S, w.R, 256);
  REQUIRE(&p.differencing_values() == &p.deviation);
  for (std::size_t i = 0; i < p.radii.size(); ++i) {
    p.deviation[i] = w.R * w.a * std::cos(w.k * (p.thetas[i] - w.theta_lo));
    p.radii[i] = p.base + p.deviation[i];
  }
  auto plain = p;
  plain.deviation.clear();
  REQUIRE(&plain.differencing_values() == &plain.radii);

  double split_err = 0.0, plain_err = 0.0;
  const auto ks = curve_curvature(p), kp = curve_curvature(plain);
  for (std::size_t i = 0; i < p.radii.size(); ++i) {
    split_err = std::max(split_err, std::abs(ks[i] - w.kappa(p.thetas[i])));
    plain_err = std::max(plain_err, std::abs(kp[i] - w.kappa(p.thetas[i])));
  }
  CHECK(split_err < 1e-11);
  // Rounding radii to ulp(r) leaves eps r / dtheta^2 noise in r''.
  CHECK(plain_err > 10.0 * split_err);

  // Editing radii without the deviation falls back to the radii.
  auto edited = p;
  edited.radii[3] *= 1.0 + 1e-9;
  CHECK(&edited.differencing_values() == &edited.radii);

  // Steps keep the split.
  FlowConfig c;
  c.n = 64;
  c.r0 = 0.1;
  c.max_steps = 10;
  c.tol_cmc = c.tol_rate = 1e-300;
  const auto t = run_flow(S, c);
  const auto& last = t.final().profile;
  CHECK(&last.differencing_values() == &last.deviation);
  CHECK(last.base == 0.1);
}
