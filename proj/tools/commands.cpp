#include "commands.hpp"

#include "weylflow/curvature.hpp"
#include "weylflow/io.hpp"
#include "weylflow/verify.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

namespace weylflow::cli {

namespace fs = std::filesystem;

namespace {

void reject_unknown(const nlohmann::json& j, const std::string& section, const std::vector<std::string>& allowed) {
  if (!j.is_object()) throw std::invalid_argument(fmt::format("{}: expected a JSON object", section));
  for (const auto& [key, _] : j.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw std::invalid_argument(fmt::format("{}.{}: unknown key", section, key));
}

double get_number(const nlohmann::json& j, const std::string& section, const char* key) {
  if (!j.at(key).is_number()) throw std::invalid_argument(fmt::format("{}.{}: expected a number", section, key));
  return j.at(key).get<double>();
}

int get_int(const nlohmann::json& j, const std::string& section, const char* key) {
  if (!j.at(key).is_number_integer())
    throw std::invalid_argument(fmt::format("{}.{}: expected an integer", section, key));
  return j.at(key).get<int>();
}

nlohmann::json vec_json(const Vec& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

nlohmann::json radius_json(double r) { return std::isfinite(r) ? nlohmann::json(r) : nlohmann::json("inf"); }

void require_dir(const fs::path& out) {
  if (!fs::is_directory(out)) throw fs::filesystem_error("output directory does not exist", out, std::make_error_code(std::errc::no_such_file_or_directory));
}

// Annulus angle for the figure and the primary annulus check: theta0 when
// rho has both a maximum and a minimum on the chamber arc, else the
// chamber width.
double annulus_angle(const WeightedRootSystem& S, double r, int grid) {
  const Theta0 t0 = theta0(S, r, grid);
  return t0.degenerate ? theta_GK(S) : t0.angle;
}

}  // namespace

RunConfig parse_config(const nlohmann::json& j) {
  reject_unknown(j, "config", {"system", "flow", "sphere", "verify"});
  if (!j.contains("system")) throw std::invalid_argument("config.system: missing");
  RunConfig cfg;
  cfg.raw = j;
  cfg.hash = config_sha256(j);
  cfg.system = system_from_json(j.at("system"));
  if (j.contains("flow")) cfg.flow = flow_config_from_json(j.at("flow"), cfg.system);

  if (j.contains("sphere")) {
    const auto& s = j.at("sphere");
    reject_unknown(s, "sphere", {"radius", "radius_fraction", "n_samples", "grid"});
    if (s.contains("radius") && s.contains("radius_fraction"))
      throw std::invalid_argument("sphere: give either radius or radius_fraction, not both");
    if (s.contains("radius")) cfg.sphere.radius = get_number(s, "sphere", "radius");
    if (s.contains("radius_fraction")) cfg.sphere.radius_fraction = get_number(s, "sphere", "radius_fraction");
    if (s.contains("n_samples")) cfg.sphere.n_samples = get_int(s, "sphere", "n_samples");
    if (s.contains("grid")) cfg.sphere.grid = get_int(s, "sphere", "grid");
    if (cfg.sphere.n_samples < 100) throw std::invalid_argument("sphere.n_samples: must be at least 100");
    if (cfg.sphere.grid < 1) throw std::invalid_argument("sphere.grid: must be positive");
  }

  if (j.contains("verify")) {
    const auto& v = j.at("verify");
    reject_unknown(v, "verify",
                   {"eta_samples", "theta0_grid", "monotone_fractions", "residual_window", "b_window_tolerance"});
    if (v.contains("eta_samples")) cfg.verify.eta_samples = get_int(v, "verify", "eta_samples");
    if (v.contains("theta0_grid")) cfg.verify.theta0_grid = get_int(v, "verify", "theta0_grid");
    if (v.contains("residual_window")) cfg.verify.residual_window = get_int(v, "verify", "residual_window");
    if (v.contains("b_window_tolerance")) cfg.verify.b_window_tolerance = get_number(v, "verify", "b_window_tolerance");
    if (v.contains("monotone_fractions")) {
      const auto& a = v.at("monotone_fractions");
      if (!a.is_array()) throw std::invalid_argument("verify.monotone_fractions: expected an array");
      for (std::size_t i = 0; i < a.size(); ++i) {
        if (!a[i].is_number())
          throw std::invalid_argument(fmt::format("verify.monotone_fractions[{}]: expected a number", i));
        cfg.verify.monotone_fractions.push_back(a[i].get<double>());
      }
      if (!cfg.verify.monotone_fractions.empty() && cfg.verify.monotone_fractions.size() < 3)
        throw std::invalid_argument("verify.monotone_fractions: need at least 3 radii");
    }
    if (cfg.verify.eta_samples < 10000) throw std::invalid_argument("verify.eta_samples: must be at least 10000");
    if (cfg.verify.theta0_grid < 2) throw std::invalid_argument("verify.theta0_grid: must be at least 2");
    if (cfg.verify.residual_window != 0 && cfg.verify.residual_window < 3)
      throw std::invalid_argument("verify.residual_window: must be 0 or at least 3");
    if (cfg.verify.b_window_tolerance && cfg.system.epsilon() != -1)
      throw std::invalid_argument("verify.b_window_tolerance: only meaningful for epsilon = -1");
  }
  return cfg;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument(fmt::format("cannot read config file {}", path.string()));
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(fmt::format("{}: {}", path.string(), e.what()));
  }
  return parse_config(j);
}

int cmd_roots(const RunConfig& cfg, const std::optional<fs::path>& out, std::ostream& log) {
  const auto& S = cfg.system;
  const WeylGroup W = weyl_group(S);
  nlohmann::json roots = nlohmann::json::array();
  for (std::size_t i = 0; i < S.positive_roots().size(); ++i)
    roots.push_back({{"root", vec_json(S.positive_roots()[i].coeffs())}, {"mult", S.multiplicities()[i]},
                     {"orbit", S.orbit_of_root()[i]}});
  nlohmann::json simple = S.simple_root_indices();
  nlohmann::json j = {{"system", system_to_json(S)},
                      {"name", S.name()},
                      {"positive_roots", roots},
                      {"simple_roots", simple},
                      {"highest_root", vec_json(S.highest_root().coeffs())},
                      {"weyl_order", W.order()},
                      {"r_S", radius_json(S.r_S())},
                      {"natural_radius", S.natural_radius()}};
  if (S.rank() == 2) j["chamber_width"] = theta_GK(S);
  log << fmt::format("system {} (epsilon = {:+d})\n", S.name(), S.epsilon());
  for (std::size_t i = 0; i < S.positive_roots().size(); ++i) {
    const Vec& a = S.positive_roots()[i].coeffs();
    std::string coords;
    for (Eigen::Index k = 0; k < a.size(); ++k) coords += fmt::format("{}{:.6f}", k ? ", " : "", a[k]);
    log << fmt::format("  root [{}]  m = {}\n", coords, S.multiplicities()[i]);
  }
  log << fmt::format("|W| = {}\nr_S = {}\n", W.order(), std::isfinite(S.r_S()) ? fmt::format("{:.12g}", S.r_S()) : "inf");
  if (S.rank() == 2) log << fmt::format("chamber width = {:.12g}\n", theta_GK(S));
  if (out) {
    require_dir(*out);
    write_json(*out / "roots.json", j, cfg.hash);
  }
  return kSuccess;
}

int cmd_sphere(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
  require_dir(out);
  const auto& S = cfg.system;
  double r = 0.0;
  if (cfg.sphere.radius) r = *cfg.sphere.radius;
  else if (cfg.sphere.radius_fraction) r = *cfg.sphere.radius_fraction * S.natural_radius();
  else throw std::invalid_argument("sphere.radius: missing (give radius or radius_fraction)");
  if (!(r > 0.0 && r < S.r_S())) throw std::invalid_argument(fmt::format("sphere.radius: {} outside (0, r_S)", r));

  const EtaBounds eta = eta_bounds(S, r, cfg.sphere.n_samples);
  nlohmann::json j = {{"eta", to_json(eta)}, {"system", system_to_json(S)}};
  if (S.epsilon() == -1) {
    const Limits b = b_limits(S);
    j["b_limits"] = {{"b_min", b.b_min}, {"b_max", b.b_max}};
  }
  if (S.rank() == 2) {
    write_text(out / "sphere.csv", sphere_csv(sphere_profile(S, r, cfg.sphere.grid), cfg.hash));
    const Theta0 t0 = theta0(S, r, std::max(cfg.sphere.grid, 2));
    j["theta0"] = {{"angle", t0.angle}, {"degenerate", t0.degenerate}};
    j["theta_GK"] = theta_GK(S);
  }
  write_json(out / "eta.json", j, cfg.hash);
  log << fmt::format("sphere r = {:.12g}: eta_min = {:.12g}, eta_max = {:.12g}\n", r, eta.eta_min, eta.eta_max);
  return kSuccess;
}

int cmd_flow(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
  require_dir(out);
  if (!cfg.flow) throw std::invalid_argument("config.flow: missing");
  const auto& S = cfg.system;
  const FlowConfig& fc = *cfg.flow;
  const Trajectory traj = run_flow(S, fc);

  write_text(out / "trajectory.csv", trajectory_csv(traj, cfg.hash));
  nlohmann::json run = run_summary(traj);
  run["flow"] = to_json(fc);
  run["system"] = system_to_json(S);
  write_json(out / "run.json", run, cfg.hash);

  const WeylGroup W = weyl_group(S);
  const auto curve = full_orbit_curve(S, W, traj.final().profile);
  write_text(out / "curve.csv", curve_csv(curve, cfg.hash));
  const double angle = annulus_angle(S, fc.r0, cfg.verify.theta0_grid);
  write_text(out / "flow.svg", render_svg(S, curve, {fc.r0, angle}, cfg.hash));

  log << fmt::format("flow {}: status {}, {} steps, H_bar = {:.15g}\n", S.name(), to_string(traj.status), traj.steps,
                     traj.final().H_bar);
  return traj.status == ConvergenceStatus::converged ? kSuccess : kNotConverged;
}

int cmd_verify(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
  require_dir(out);
  if (!cfg.flow) throw std::invalid_argument("config.flow: missing");
  const auto& S = cfg.system;
  const FlowConfig& fc = *cfg.flow;
  const Trajectory traj = run_flow(S, fc);
  const bool converged = traj.status == ConvergenceStatus::converged;

  VerifyReport report;
  auto add = [&](Check c, bool needs_convergence) {
    if (needs_convergence && !converged) {
      c.status = CheckStatus::inconclusive;
      c.note = fmt::format("flow ended with status {}", to_string(traj.status));
    }
    report.add(std::move(c));
  };

  if (S.rank() == 2) {
    const Theta0 t0 = theta0(S, fc.r0, cfg.verify.theta0_grid);
    if (t0.degenerate) {
      Check c;
      c.name = "annulus_theta0";
      c.claim = "the converged curve lies in the annulus r cos(theta0) <= |phi| <= r / cos(theta0)";
      c.status = CheckStatus::skipped;
      c.note = "rho has no interior maximum/minimum pair on the chamber arc";
      report.add(std::move(c));
    } else {
      add(check_annulus(traj.final().profile, fc.r0, t0.angle, "annulus_theta0"), true);
    }
    add(check_annulus(traj.final().profile, fc.r0, theta_GK(S), "annulus_theta_GK"), true);
  }
  add(check_eta_sandwich(S, fc.r0, traj.final().H_bar, cfg.verify.eta_samples), true);
  add(check_max_principle(traj), true);
  add(check_convexity(traj), true);
  add(check_domain(S, traj), true);
  add(check_volume(traj), true);
  add(check_ray_invariance(traj), true);
  if (cfg.verify.b_window_tolerance)
    add(check_b_window(S, fc.r0, traj.final().H_bar, *cfg.verify.b_window_tolerance), true);
  if (cfg.verify.residual_window > 0) {
    report.add(check_hs_evolution_residual(S, fc, cfg.verify.residual_window, EvolutionForm::stated));
    report.add(check_hs_evolution_residual(S, fc, cfg.verify.residual_window, EvolutionForm::corrected));
  }
  if (!cfg.verify.monotone_fractions.empty()) {
    std::vector<double> radii;
    for (double f : cfg.verify.monotone_fractions) radii.push_back(f * S.natural_radius());
    report.add(check_h_monotone(S, radii, fc));
  }

  nlohmann::json j = {{"checks", report.to_json()}, {"run", run_summary(traj)}, {"system", system_to_json(S)},
                      {"flow", to_json(fc)}};
  write_json(out / "verify.json", j, cfg.hash);
  for (const auto& c : report.checks()) log << fmt::format("{:<32} {}\n", c.name, to_string(c.status));

  if (report.any_failed()) return kCheckFailure;
  if (!converged || report.any_inconclusive()) return kNotConverged;
  return kSuccess;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Modified volume-preserving curvature flow on weighted root systems"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir;
  bool quiet = false;
  std::vector<CLI::App*> subs;
  for (const char* name : {"roots", "sphere", "flow", "verify"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON configuration file")->required();
    auto* o = sub->add_option("--out", out_dir, "existing output directory");
    if (std::string(name) != "roots") o->required();
    sub->add_flag("--quiet", quiet, "suppress progress output");
    subs.push_back(sub);
  }
  subs[0]->description("print the positive roots, |W|, r_S and the chamber width");
  subs[1]->description("curvature of a geodesic sphere over the chamber directions");
  subs[2]->description("run the flow and write trajectory, curve and figure");
  subs[3]->description("run the flow and check the quantitative claims");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kUsageError;
  }

  std::ostringstream sink;
  std::ostream& log = quiet ? static_cast<std::ostream&>(sink) : out;
  try {
    const RunConfig cfg = load_config(config_path);
    const std::optional<fs::path> dir = out_dir.empty() ? std::nullopt : std::optional<fs::path>(out_dir);
    if (subs[0]->parsed()) return cmd_roots(cfg, dir, log);
    if (subs[1]->parsed()) return cmd_sphere(cfg, *dir, log);
    if (subs[2]->parsed()) return cmd_flow(cfg, *dir, log);
    return cmd_verify(cfg, *dir, log);
  } catch (const fs::filesystem_error& e) {
    err << "filesystem error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }
}

}  // namespace weylflow::cli
