#pragma once

// Weighted root systems, their Weyl groups and Weyl chambers.
//
// A weighted root system is a crystallographic root system realized in an
// l-dimensional Euclidean space V (orthonormal coordinates), together with a
// multiplicity per root and a sign epsilon (+1 compact type, -1 non-compact
// type). Roots are stored as covectors; since the coordinates are
// orthonormal a covector and its metric dual share the same coefficients.

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace weylflow {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Thrown when a numerical argument leaves the domain where a quantity is
/// defined (poles, radii outside the admissible ball, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A linear form on V, paired against orthonormal coordinates.
class Covector {
 public:
  Covector() = default;
  explicit Covector(Vec coeffs) : coeffs_(std::move(coeffs)) {}

  double operator()(const Vec& v) const { return coeffs_.dot(v); }

  const Vec& coeffs() const { return coeffs_; }
  /// Metric dual: the vector a with <a, v> = alpha(v).
  Vec sharp() const { return coeffs_; }
  double norm() const { return coeffs_.norm(); }
  Eigen::Index dim() const { return coeffs_.size(); }

 private:
  Vec coeffs_;
};

enum class Family { a, b, c, d, bc, g2, f4, custom };

std::string to_string(Family f);
/// Parses "a", "bc", "g2", ... (no rank suffix).
Family family_from_string(const std::string& s);

/// Number of multiplicity values (W-orbits of roots) a family expects.
/// Orbit order: a,d: [all]; b: [e_i+-e_j, e_i]; c: [e_i+-e_j, 2e_i];
/// bc: [e_i+-e_j, e_i, 2e_i]; g2: [short, long]; f4: [long, short].
int orbit_count(Family f);

class WeightedRootSystem {
 public:
  int rank() const { return rank_; }
  Family family() const { return family_; }
  int epsilon() const { return epsilon_; }

  /// Positive roots (Delta_+), chosen by positivity on regular_vector().
  const std::vector<Covector>& positive_roots() const { return roots_; }
  const std::vector<int>& multiplicities() const { return mults_; }
  /// W-orbit index of each positive root (index into the per-orbit list).
  const std::vector<int>& orbit_of_root() const { return orbits_; }
  /// Multiplicities as supplied, one per orbit (empty for custom systems).
  const std::vector<int>& orbit_multiplicities() const { return orbit_mults_; }

  const std::vector<int>& simple_root_indices() const { return simple_; }
  std::size_t highest_root_index() const { return highest_; }
  const Covector& highest_root() const { return roots_[highest_]; }
  const Vec& regular_vector() const { return regular_; }

  /// pi / |delta| for epsilon = +1, +infinity for epsilon = -1.
  double r_S() const { return r_s_; }
  /// pi / |delta| regardless of epsilon; a length scale for both types.
  double natural_radius() const;

  bool test_mode() const { return test_mode_; }
  /// Sum of all multiplicities plus (rank - 1): the Euclidean limit r*H.
  int total_dimension_minus_one() const;

  /// Family tag with rank suffix, e.g. "a2", "bc3", "custom".
  std::string name() const;

 private:
  friend WeightedRootSystem build_system(Family, int, std::span<const int>, int, bool);
  friend WeightedRootSystem build_custom_system(const std::vector<Vec>&,
                                                std::span<const int>, int, bool);
  void finalize();

  int rank_ = 0;
  Family family_ = Family::custom;
  int epsilon_ = 1;
  bool test_mode_ = false;
  std::vector<Covector> roots_;
  std::vector<int> mults_;
  std::vector<int> orbits_;
  std::vector<int> orbit_mults_;
  std::vector<int> simple_;
  std::size_t highest_ = 0;
  Vec regular_;
  double r_s_ = 0.0;
};

/// Builds a standard realization of a family. Multiplicities are given per
/// W-orbit (see orbit_count). Zero multiplicities are accepted only when
/// test_mode is set. Throws std::invalid_argument on bad input.
WeightedRootSystem build_system(Family family, int rank, std::span<const int> mults_per_orbit,
                                int epsilon, bool test_mode = false);

/// Custom system from a list of roots (signs and duplicates are normalized)
/// with one multiplicity per listed root. Axioms are not enforced here; use
/// validate_system.
WeightedRootSystem build_custom_system(const std::vector<Vec>& roots, std::span<const int> mults,
                                       int epsilon, bool test_mode = false);

/// Orthogonal reflection in the hyperplane alpha = 0.
Mat reflection(const Covector& alpha);

struct WeylGroup {
  std::vector<Mat> elements;  // elements[0] is the identity
  std::vector<Mat> generators;

  std::size_t order() const { return elements.size(); }
};

/// Orbit closure of the simple reflections. Throws std::runtime_error when
/// the closure exceeds `cap` elements.
WeylGroup weyl_group(const WeightedRootSystem& S, std::size_t cap = 200000);

/// Closed fundamental chamber membership: alpha(v) >= -tol*|alpha||v|.
bool in_closed_chamber(const WeightedRootSystem& S, const Vec& v, double tol = 1e-12);

struct Folded {
  Mat w;
  Vec v;
};

/// Maps v into the closed fundamental chamber by repeated reflection in the
/// first simple root that is negative on it. Identity for v already in the
/// closed chamber.
Folded fold_to_chamber(const WeightedRootSystem& S, const Vec& v);

/// Directions of the closed chamber in a rank-2 system, as an angular arc.
struct ChamberArc {
  double theta_lo = 0.0;
  double theta_hi = 0.0;
  double width() const { return theta_hi - theta_lo; }
};

ChamberArc chamber_arc(const WeightedRootSystem& S);

struct AxiomCheck {
  std::string name;
  bool pass = false;
  double worst_residual = 0.0;
};

struct SystemDiagnostics {
  std::vector<AxiomCheck> checks;
  bool all_pass() const;
};

SystemDiagnostics validate_system(const WeightedRootSystem& S);

// JSON description: {"family": "a2", "rank": 2, "mults": [1], "epsilon": 1}
// or {"roots": [[...], ...], "mults": [...], "epsilon": -1}. The optional key
// "test_mode" admits zero multiplicities.
WeightedRootSystem system_from_json(const nlohmann::json& j);
nlohmann::json system_to_json(const WeightedRootSystem& S);

}  // namespace weylflow
