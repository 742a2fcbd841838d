#pragma once

// Output files: CSV tables, JSON documents and the SVG figure. Every file
// carries the SHA-256 of the configuration that produced it. Numbers are
// written with 17 significant digits so that reruns are byte-identical.

#include "weylflow/curvature.hpp"
#include "weylflow/flow.hpp"
#include "weylflow/rootsys.hpp"

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace weylflow {

/// Lower-case hex SHA-256 of the compact serialization of j.
std::string config_sha256(const nlohmann::json& j);

/// %.17g
std::string format_number(double x);

void write_text(const std::filesystem::path& path, const std::string& text);

/// JSON with a config_sha256 key, keys sorted, two-space indent.
void write_json(const std::filesystem::path& path, nlohmann::json j, const std::string& hash);

/// One row per node per sampled state: step,t,theta,r,kappa,rho,H_mod.
std::string trajectory_csv(const Trajectory& traj, const std::string& hash);

/// Per sampled state: step, t, H_bar, area, length, cmc_residual plus the
/// run status and running extremes.
nlohmann::json run_summary(const Trajectory& traj);

/// x,y per point of a closed curve.
std::string curve_csv(const std::vector<Vec>& points, const std::string& hash);

std::string sphere_csv(const std::vector<SphereProfileRow>& rows, const std::string& hash);

struct SvgOverlay {
  double r = 0.0;      // reference radius of the annulus
  double theta = 0.0;  // annulus angle: circles r cos(theta) and r / cos(theta)
};

/// Closed orbit curve, the two annulus circles and the chamber walls.
/// Coordinates are model coordinates at full precision inside a scaling
/// group.
std::string render_svg(const WeightedRootSystem& S, const std::vector<Vec>& curve, const SvgOverlay& overlay,
                       const std::string& hash);

/// Points of the first polyline of an SVG produced by render_svg.
std::vector<Vec> parse_svg_polyline(const std::string& svg);

/// Radii of the circles of an SVG produced by render_svg, in document order.
std::vector<double> parse_svg_circles(const std::string& svg);

}  // namespace weylflow
