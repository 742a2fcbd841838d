// Acceptance run: one PASS/FAIL line per criterion. Exit status is nonzero
// when any criterion fails.

#include "weylflow/curvature.hpp"
#include "weylflow/flow.hpp"
#include "weylflow/io.hpp"
#include "weylflow/verify.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <fmt/format.h>

using namespace weylflow;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& what, const std::string& detail) {
  if (!ok) ++failures;
  fmt::print("[{}] criterion {:>2}: {} | {}\n", ok ? "PASS" : "FAIL", id, what, detail);
  std::fflush(stdout);
}

void info(const std::string& text) {
  fmt::print("       {}\n", text);
  std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

WeightedRootSystem make(Family f, std::vector<int> m, int eps, bool test_mode = false) {
  return build_system(f, 2, m, eps, test_mode);
}

struct Run {
  WeightedRootSystem S;
  FlowConfig config;
  Trajectory traj;
  double seconds = 0.0;
};

Run protocol_run(WeightedRootSystem S, double r0, double tol = 1e-6) {
  FlowConfig c;
  c.n = 256;
  c.r0 = r0;
  c.cfl = 0.25;
  c.tol_cmc = tol;
  c.tol_rate = tol;
  const auto t0 = std::chrono::steady_clock::now();
  Run run{S, c, run_flow(S, c), 0.0};
  run.seconds = seconds_since(t0);
  return run;
}

std::string describe(const Run& r) {
  return fmt::format("{} status={} steps={} H_bar={:.12g} ({:.1f} s)", r.S.name(), to_string(r.traj.status),
                     r.traj.steps, r.traj.final().H_bar, r.seconds);
}

bool converged(const Run& r) { return r.traj.status == ConvergenceStatus::converged; }

// Criterion 7 as stated: sampled H_mod within [min0, max0] widened by
// 1e-4 (max0 - min0).
bool max_principle_strict(const Trajectory& t, double& worst_excess) {
  const auto& h0 = t.initial().H_mod;
  const auto [lo, hi] = std::minmax_element(h0.begin(), h0.end());
  const double d = 1e-4 * (*hi - *lo);
  worst_excess = 0.0;
  for (const auto& s : t.states)
    for (double h : s.H_mod) worst_excess = std::max({worst_excess, *lo - d - h, h - *hi - d});
  return worst_excess <= 0.0;
}

void trajectory_criteria(int id_convex, int id_conserve, int id_ray, const std::vector<const Run*>& runs,
                         const std::string& label) {
  bool convex = true, conserve = true, ray = true;
  std::string dc, dv, dr;
  for (const Run* r : runs) {
    const auto cv = check_convexity(r->traj);
    const auto dm = check_domain(r->S, r->traj);
    convex = convex && cv.passed() && dm.passed();
    dc += fmt::format("{}: min_kappa={:.6g} radius in [{:.6g}, {:.6g}]; ", r->S.name(),
                      r->traj.extremes.min_kappa, r->traj.extremes.min_radius, r->traj.extremes.max_radius);

    const auto vol = check_volume(r->traj);
    double excess = 0.0;
    const bool mp = max_principle_strict(r->traj, excess);
    conserve = conserve && vol.passed() && mp;
    dv += fmt::format("{}: area drift={:.3g} H_mod excess={:.3g}; ", r->S.name(), vol.measured.get<double>(), excess);

    const auto ri = check_ray_invariance(r->traj);
    ray = ray && (ri.passed() || ri.status == CheckStatus::skipped);
    dr += fmt::format("{}: {} {}; ", r->S.name(), to_string(ri.status),
                      ri.measured.is_null() ? std::string("-") : ri.measured.at("max_drift").dump());
  }
  if (id_convex) report(id_convex, convex, "convexity and domain" + label, dc);
  if (id_conserve) report(id_conserve, conserve, "area conservation and maximum principle" + label, dv);
  if (id_ray) report(id_ray, ray, "ray invariance of H_mod extrema" + label, dr);
}

}  // namespace

int main() {
  const auto a2 = make(Family::a, {1}, 1);
  const auto b2 = make(Family::b, {1, 1}, 1);
  const auto g2 = make(Family::g2, {1, 1}, 1);
  const auto a2n = make(Family::a, {1}, -1);

  // 1. Euclidean fixed point.
  {
    const auto S = make(Family::a, {0}, 1, true);
    FlowConfig c;
    c.n = 256;
    c.r0 = 0.1;
    const auto t0 = std::chrono::steady_clock::now();
    const auto t = run_flow(S, c);
    const double secs = seconds_since(t0);
    double dev = 0.0;
    for (double r : t.final().profile.radii) dev = std::max(dev, std::abs(r - 0.1));
    const double herr = std::abs(t.final().H_bar - 10.0);
    report(1, t.status == ConvergenceStatus::converged && t.steps == 0 && dev <= 1e-12 && herr <= 1e-10 && secs < 1.0,
           "Euclidean fixed point",
           fmt::format("steps={} max|r-r0|={:.3g} |H_bar-1/r0|={:.3g} time={:.3f} s", t.steps, dev, herr, secs));
  }

  const Run ra = protocol_run(a2, 0.05 * a2.r_S());
  const Run rb = protocol_run(b2, 0.05 * b2.r_S());
  const Run rg = protocol_run(g2, 0.05 * g2.r_S());
  info("run 2: " + describe(ra));
  info("run 3: " + describe(rb));
  info("g2 run: " + describe(rg));

  // 2-3. Annuli from the chamber width.
  {
    const auto c = check_annulus(ra.traj.final().profile, ra.config.r0, std::numbers::pi / 6);
    report(2, converged(ra) && c.passed(), "a2 annulus B(2r/sqrt3) minus B(sqrt3 r/2)",
           fmt::format("radii {} bounds {}", c.measured.dump(), c.bound.dump()));
  }
  {
    const auto c = check_annulus(rb.traj.final().profile, rb.config.r0, std::numbers::pi / 4);
    report(3, converged(rb) && c.passed(), "b2 annulus B(sqrt2 r) minus B(r/sqrt2)",
           fmt::format("radii {} bounds {}", c.measured.dump(), c.bound.dump()));
  }

  // 4. Annulus with the computed theta0.
  {
    const auto ta = theta0(a2, ra.config.r0, 4096);
    const auto tg = theta0(g2, rg.config.r0, 4096);
    const auto ca = check_annulus(ra.traj.final().profile, ra.config.r0, ta.angle);
    const auto cg = check_annulus(rg.traj.final().profile, rg.config.r0, tg.angle);
    const bool ok = converged(ra) && converged(rg) && !ta.degenerate && !tg.degenerate && ca.passed() &&
                    cg.passed() && ta.angle <= std::numbers::pi / 6 + 1e-15 && tg.angle <= theta_GK(g2) + 1e-15;
    report(4, ok, "annulus with computed theta0",
           fmt::format("a2 theta0={:.12g} (pi/6={:.12g}) {}; g2 theta0={:.12g} (width={:.12g}) {}", ta.angle,
                       std::numbers::pi / 6, to_string(ca.status), tg.angle, theta_GK(g2), to_string(cg.status)));
  }

  // 5. Curvature sandwich.
  {
    const Run rn = protocol_run(a2n, 0.25);
    info("eps=-1 run: " + describe(rn));
    bool ok = converged(rn);
    std::string d;
    for (const Run* r : {&ra, &rb, &rn}) {
      const auto c = check_eta_sandwich(r->S, r->config.r0, r->traj.final().H_bar, 10000);
      ok = ok && converged(*r) && c.passed();
      d += fmt::format("{}(eps={:+d}): H={:.12g} in [{:.12g}, {:.12g}]; ", r->S.name(), r->S.epsilon(),
                       r->traj.final().H_bar, c.bound.at("eta_min").get<double>(), c.bound.at("eta_max").get<double>());
    }
    report(5, ok, "eta_min <= H <= eta_max", d);
  }

  // 6-8 on runs 2-3.
  trajectory_criteria(6, 7, 8, {&ra, &rb}, "");
  // The protocol tolerance is met by the round start; tighter runs exercise
  // the same checks along an actual evolution.
  for (const auto* sys : {&a2, &b2}) {
    const Run tr = protocol_run(*sys, 0.05 * sys->r_S(), 1e-10);
    info("supplementary tightened run: " + describe(tr));
    const auto mp = check_max_principle(tr.traj);
    const auto cv = check_convexity(tr.traj);
    const auto vol = check_volume(tr.traj);
    const auto ri = check_ray_invariance(tr.traj);
    info(fmt::format("supplementary: convexity {} / volume {} (drift {:.3g}) / max principle {} / ray invariance {} {}",
                     to_string(cv.status), to_string(vol.status), vol.measured.get<double>(), to_string(mp.status),
                     to_string(ri.status), ri.measured.dump()));
  }

  // 9. Evolution law of the modified curvature.
  {
    FlowConfig c;
    c.n = 128;
    c.r0 = 5.0;
    c.cfl = 0.25;
    const auto stated = check_hs_evolution_residual(a2n, c, 50, EvolutionForm::stated);
    report(9, stated.passed(), "evolution-law residual order >= 1 under (n, dt) refinement",
           fmt::format("a2 eps=-1 r0=5, n 128->256, 50 coarse steps: {}", stated.measured.dump()));
    const auto corrected = check_hs_evolution_residual(a2n, c, 50, EvolutionForm::corrected);
    info(fmt::format("same residual with the |A|^2 term and 1/sin^2 coefficient: {} {}", to_string(corrected.status),
                     corrected.measured.dump()));
  }

  // 10. Monotonicity and limits.
  {
    FlowConfig c;
    c.n = 256;
    const double rs = a2.r_S();
    const auto mono = check_h_monotone(a2, {0.03 * rs, 0.05 * rs, 0.07 * rs}, c);
    const auto b = b_limits(a2n);
    double prev_max = std::numeric_limits<double>::infinity(), prev_min = prev_max;
    bool nonincreasing = true;
    double eta64 = 0.0;
    std::string curve;
    for (double s = 1.0; s <= 64.0; s *= 2.0) {
      const auto e = eta_bounds(a2n, s, 10000);
      nonincreasing = nonincreasing && e.eta_max <= prev_max && e.eta_min <= prev_min;
      prev_max = e.eta_max;
      prev_min = e.eta_min;
      eta64 = e.eta_max;
      curve += fmt::format("{:g}:[{:.6g},{:.6g}] ", s, e.eta_min, e.eta_max);
    }
    const double gap = std::abs(eta64 - 1.0 / 64.0 - b.b_max);
    report(10, mono.passed() && nonincreasing && gap <= 1e-3, "H(r) decreasing; eta limits",
           fmt::format("H(r) {}; |eta_max(64)-1/64-b_max|={:.3g} (b_max={:.12g}); eta non-increasing={} {}",
                       mono.measured.at("runs").dump(), gap, b.b_max, nonincreasing, curve));
  }

  // 11. Refinement of the converged H_bar.
  {
    std::vector<double> H;
    std::string d;
    bool ok = true;
    for (int n : {128, 256, 512}) {
      FlowConfig c;
      c.n = n;
      c.r0 = 5.0;
      c.tol_cmc = c.tol_rate = 1e-11;
      c.sample_every = 100000;
      const auto t0 = std::chrono::steady_clock::now();
      const auto t = run_flow(a2n, c);
      ok = ok && t.status == ConvergenceStatus::converged;
      H.push_back(t.final().H_bar);
      d += fmt::format("n={} H_bar={:.15g} steps={} ({:.1f} s); ", n, t.final().H_bar, t.steps, seconds_since(t0));
    }
    const double ratio = (H[0] - H[1]) / (H[1] - H[2]);
    report(11, ok && ratio >= 3.0 && ratio <= 5.0, "Richardson ratio of converged H_bar in [3, 5]",
           fmt::format("a2 eps=-1 r0=5: {}ratio={:.6g}", d, ratio));
  }

  // 12. Figure: W-invariance and annulus containment of the emitted curve.
  {
    const auto W = weyl_group(a2);
    const auto curve = full_orbit_curve(a2, W, ra.traj.final().profile);
    const double angle = theta0(a2, ra.config.r0, 4096).angle;
    const auto svg = render_svg(a2, curve, {ra.config.r0, angle}, "acceptance");
    const auto pts = parse_svg_polyline(svg);
    const auto circles = parse_svg_circles(svg);
    double worst = 0.0;
    for (const auto& w : W.elements)
      for (const auto& p : pts) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& q : pts) best = std::min(best, (w * p - q).norm());
        worst = std::max(worst, best);
      }
    bool between = circles.size() == 2;
    double inner_gap = std::numeric_limits<double>::infinity(), outer_gap = inner_gap;
    for (const auto& p : pts) {
      inner_gap = std::min(inner_gap, p.norm() - circles[0]);
      outer_gap = std::min(outer_gap, circles[1] - p.norm());
    }
    between = between && inner_gap > 0.0 && outer_gap > 0.0;
    report(12, worst <= 1e-10 && between && pts.size() == 6 * 256, "SVG curve: dihedral symmetry, inside annulus",
           fmt::format("points={} max W-mismatch={:.3g} gap to inner={:.6g} to outer={:.6g}", pts.size(), worst,
                       inner_gap, outer_gap));
  }

  fmt::print("{} criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
