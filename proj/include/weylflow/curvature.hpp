#pragma once

// Root-driven curvature correction rho and the mean curvature of lifted
// hypersurfaces, evaluated entirely in the flat V.
//
// For a point phi of V with outward unit normal nu,
//
//   rho(phi, nu) = sum_{alpha > 0} m_alpha * alpha(nu) * cot_eps(alpha(phi)),
//
// where cot_eps is cot for epsilon = +1 and coth for epsilon = -1. A root
// vanishing at phi contributes its limit m_alpha / |phi|, which is exact when
// nu is radial (round spheres). The mean curvature of the lifted
// hypersurface is rho plus the Euclidean mean curvature of the profile.

#include "weylflow/rootsys.hpp"

#include <functional>
#include <vector>

#include <nlohmann/json.hpp>

namespace weylflow {

/// Relative tolerance deciding when a root counts as vanishing at a point:
/// |alpha(phi)| < kWallTolerance * |alpha| * |phi|.
inline constexpr double kWallTolerance = 1e-9;

/// sqrt(eps) / tan(sqrt(eps) x). Throws DomainError at the pole x = 0 and,
/// for eps = +1, when |x| >= pi.
double cot_eps(double x, int epsilon);

namespace detail {
/// Laurent series 1/x - eps x/3 - x^3/45 - 2 eps x^5/945 used for |x| < 1e-4.
double cot_eps_series(double x, int epsilon);
}  // namespace detail

/// rho at phi with unit normal nu. Requires 0 < |phi| < r_S and |nu| = 1.
double rho_point(const WeightedRootSystem& S, const Vec& phi, const Vec& nu,
                 double wall_tolerance = kWallTolerance);

struct CurvatureSample {
  Vec direction;
  double radius = 0.0;
  double H = 0.0;
  double rho = 0.0;
  std::vector<int> boundary_roots;  // indices into positive_roots()
};

/// Mean curvature of the geodesic sphere of radius r at direction Z (Z in
/// the closed chamber, |Z| = 1): rho(rZ, Z) + (l - 1)/r.
CurvatureSample sphere_H(const WeightedRootSystem& S, double r, const Vec& Z,
                         double wall_tolerance = kWallTolerance);

/// rho(phi, nu) + euclidean_H.
double lifted_H(const WeightedRootSystem& S, const Vec& phi, const Vec& nu, double euclidean_H);

struct EtaBounds {
  double eta_min = 0.0;
  double eta_max = 0.0;
  Vec argmin_dir;
  Vec argmax_dir;
  double radius = 0.0;
};

/// Extremes of Z -> sphere_H(S, s, Z).H over unit directions in the closed
/// chamber. The sampling is repeated at 2*n_samples and the wider interval
/// is kept.
EtaBounds eta_bounds(const WeightedRootSystem& S, double s, int n_samples);

struct Limits {
  double b_min = 0.0;
  double b_max = 0.0;
};

/// Extremes of Z -> sum m_alpha |alpha(Z)| over the unit sphere; the large
/// radius limits of eta for non-compact type (epsilon = -1 only).
Limits b_limits(const WeightedRootSystem& S, int n_samples = 10000);

/// Largest angle between two directions of the closed chamber (rank 2).
double theta_GK(const WeightedRootSystem& S);

struct Theta0 {
  double angle = 0.0;
  bool degenerate = false;
};

/// Largest angular separation between a local maximum of rho along the
/// round chamber arc of radius r and a neighboring local minimum (rank 2).
Theta0 theta0(const WeightedRootSystem& S, double r, int grid_n);

/// One row per chamber direction of the round sphere of radius r.
struct SphereProfileRow {
  double theta = 0.0;
  double H = 0.0;
  double rho = 0.0;
  bool boundary = false;
};

std::vector<SphereProfileRow> sphere_profile(const WeightedRootSystem& S, double r, int n);

nlohmann::json to_json(const EtaBounds& e);

namespace detail {
struct Extremes {
  double min_value = 0.0;
  double max_value = 0.0;
  Vec argmin;
  Vec argmax;
};
/// Sample-and-refine extremes of f over unit directions of the closed chamber.
Extremes chamber_extremes(const WeightedRootSystem& S, const std::function<double(const Vec&)>& f,
                          int n_samples);
}  // namespace detail

}  // namespace weylflow
