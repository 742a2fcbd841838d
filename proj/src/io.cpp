#include "weylflow/io.hpp"

#include <cmath>
#include <fstream>
#include <regex>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>
#include <openssl/evp.h>

namespace weylflow {

std::string config_sha256(const nlohmann::json& j) {
  const std::string text = j.dump();
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

std::string format_number(double x) { return fmt::format("{:.17g}", x); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot open {} for writing", path.string()));
  out << text;
  if (!out) throw std::runtime_error(fmt::format("write to {} failed", path.string()));
}

void write_json(const std::filesystem::path& path, nlohmann::json j, const std::string& hash) {
  j["config_sha256"] = hash;
  write_text(path, j.dump(2) + "\n");
}

std::string trajectory_csv(const Trajectory& traj, const std::string& hash) {
  std::string out = fmt::format("# config_sha256={}\nstep,t,theta,r,kappa,rho,H_mod\n", hash);
  for (const auto& s : traj.states)
    for (std::size_t i = 0; i < s.profile.radii.size(); ++i)
      out += fmt::format("{},{},{},{},{},{},{}\n", s.step, format_number(s.t), format_number(s.profile.thetas[i]),
                         format_number(s.profile.radii[i]), format_number(s.kappa[i]), format_number(s.rho[i]),
                         format_number(s.H_mod[i]));
  return out;
}

nlohmann::json run_summary(const Trajectory& traj) {
  nlohmann::json steps = nlohmann::json::array(), times = nlohmann::json::array(), hbar = nlohmann::json::array(),
                 area = nlohmann::json::array(), length = nlohmann::json::array(), res = nlohmann::json::array();
  for (const auto& s : traj.states) {
    steps.push_back(s.step);
    times.push_back(s.t);
    hbar.push_back(s.H_bar);
    area.push_back(s.area);
    length.push_back(s.length);
    res.push_back(s.cmc_residual());
  }
  const auto& ex = traj.extremes;
  return {{"status", to_string(traj.status)},
          {"steps", traj.steps},
          {"final_H_bar", traj.final().H_bar},
          {"final_t", traj.final().t},
          {"series", {{"step", steps}, {"t", times}, {"H_bar", hbar}, {"area", area}, {"length", length},
                      {"cmc_residual", res}}},
          {"extremes", {{"min_kappa", ex.min_kappa}, {"min_radius", ex.min_radius}, {"max_radius", ex.max_radius},
                        {"min_H_mod", ex.min_H_mod}, {"max_H_mod", ex.max_H_mod},
                        {"max_area_drift", ex.max_area_drift}}}};
}

std::string curve_csv(const std::vector<Vec>& points, const std::string& hash) {
  std::string out = fmt::format("# config_sha256={}\nx,y\n", hash);
  for (const auto& p : points) out += fmt::format("{},{}\n", format_number(p[0]), format_number(p[1]));
  return out;
}

std::string sphere_csv(const std::vector<SphereProfileRow>& rows, const std::string& hash) {
  std::string out = fmt::format("# config_sha256={}\ntheta,H,rho,boundary\n", hash);
  for (const auto& r : rows)
    out += fmt::format("{},{},{},{}\n", format_number(r.theta), format_number(r.H), format_number(r.rho),
                       r.boundary ? 1 : 0);
  return out;
}

std::string render_svg(const WeightedRootSystem& S, const std::vector<Vec>& curve, const SvgOverlay& overlay,
                       const std::string& hash) {
  if (S.rank() != 2) throw std::invalid_argument("render_svg: rank-2 systems only");
  if (curve.empty()) throw std::invalid_argument("render_svg: empty curve");
  const double inner = overlay.r * std::cos(overlay.theta);
  const double outer = overlay.r / std::cos(overlay.theta);
  double extent = outer;
  for (const auto& p : curve) extent = std::max(extent, p.norm());
  extent *= 1.15;
  const double size = 600.0;
  const double k = 0.5 * size / extent;

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += fmt::format("<!-- config_sha256={} -->\n", hash);
  svg += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{0}\" viewBox=\"0 0 {0} {0}\">\n", size);
  svg += fmt::format("<rect width=\"{0}\" height=\"{0}\" fill=\"white\"/>\n", size);
  svg += fmt::format("<g transform=\"translate({},{}) scale({},{})\">\n", 0.5 * size, 0.5 * size,
                     format_number(k), format_number(-k));

  // Mirror lines: kernels of the positive roots.
  for (const auto& a : S.positive_roots()) {
    const double ax = a.coeffs()[0], ay = a.coeffs()[1];
    const double n = std::hypot(ax, ay);
    const double dx = -ay / n * extent, dy = ax / n * extent;
    svg += fmt::format(
        "<line class=\"wall\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#bbbbbb\" stroke-width=\"1\" "
        "vector-effect=\"non-scaling-stroke\"/>\n",
        format_number(-dx), format_number(-dy), format_number(dx), format_number(dy));
  }
  for (double radius : {inner, outer})
    svg += fmt::format(
        "<circle class=\"annulus\" cx=\"0\" cy=\"0\" r=\"{}\" fill=\"none\" stroke=\"#d62728\" "
        "stroke-width=\"1\" stroke-dasharray=\"4 3\" vector-effect=\"non-scaling-stroke\"/>\n",
        format_number(radius));

  svg += "<polyline class=\"curve\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" "
         "vector-effect=\"non-scaling-stroke\" points=\"";
  for (std::size_t i = 0; i <= curve.size(); ++i) {
    const Vec& p = curve[i % curve.size()];
    if (i) svg += ' ';
    svg += format_number(p[0]) + ',' + format_number(p[1]);
  }
  svg += "\"/>\n</g>\n</svg>\n";
  return svg;
}

std::vector<Vec> parse_svg_polyline(const std::string& svg) {
  const auto start = svg.find("<polyline");
  if (start == std::string::npos) throw std::invalid_argument("parse_svg_polyline: no polyline");
  const std::string key = "points=\"";
  const auto open = svg.find(key, start);
  const auto close = svg.find('"', open + key.size());
  if (open == std::string::npos || close == std::string::npos)
    throw std::invalid_argument("parse_svg_polyline: malformed points attribute");
  std::istringstream in(svg.substr(open + key.size(), close - open - key.size()));
  std::vector<Vec> pts;
  std::string pair;
  while (in >> pair) {
    const auto comma = pair.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("parse_svg_polyline: malformed point");
    Vec p(2);
    p << std::stod(pair.substr(0, comma)), std::stod(pair.substr(comma + 1));
    pts.push_back(p);
  }
  // The closing point repeats the first.
  if (pts.size() > 1 && (pts.front() - pts.back()).norm() == 0.0) pts.pop_back();
  return pts;
}

std::vector<double> parse_svg_circles(const std::string& svg) {
  static const std::regex re("<circle[^>]*\\sr=\"([^\"]+)\"");
  std::vector<double> radii;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), re); it != std::sregex_iterator(); ++it)
    radii.push_back(std::stod((*it)[1].str()));
  return radii;
}

}  // namespace weylflow
