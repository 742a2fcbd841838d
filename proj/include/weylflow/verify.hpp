#pragma once

// Quantitative checks of the soap-bubble claims against flow output: annulus
// confinement, curvature sandwich, convexity, conservation, the maximum
// principle, stationarity of curvature extrema and the evolution law of the
// modified curvature.
//
// Tolerances fall into two budgets. Scheme error depends on the angular
// resolution and is attributed to c*dtheta^2; drift depends on dt and the
// step count. Each check states which budget its tolerance draws from.

#include "weylflow/flow.hpp"
#include "weylflow/rootsys.hpp"

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace weylflow {

enum class CheckStatus { pass, fail, inconclusive, skipped };
std::string to_string(CheckStatus s);
CheckStatus check_status_from_string(const std::string& s);

struct Check {
  std::string name;
  CheckStatus status = CheckStatus::fail;
  nlohmann::json measured;
  nlohmann::json bound;
  double tolerance = 0.0;
  std::string claim;  // the statement being checked
  std::string note;

  bool passed() const { return status == CheckStatus::pass; }
};

class VerifyReport {
 public:
  /// Throws std::invalid_argument for a check without a name or claim, or a
  /// duplicate name.
  void add(Check c);
  const std::vector<Check>& checks() const { return checks_; }
  const Check& at(const std::string& name) const;
  bool any_failed() const;
  bool any_inconclusive() const;

  nlohmann::json to_json() const;
  static VerifyReport from_json(const nlohmann::json& j);

 private:
  std::vector<Check> checks_;
};

/// r cos(theta) - tol <= r_i <= r / cos(theta) + tol with tol = 1e-3 r.
Check check_annulus(const RadialProfile& profile, double r, double theta, const std::string& name = "annulus");

/// eta_min(r) - tol <= H_final <= eta_max(r) + tol with tol = 1e-3 |H_final|.
Check check_eta_sandwich(const WeightedRootSystem& S, double r, double H_final, int n_samples = 10000);

/// Every sampled H_mod lies in [min0 - d, max0 + d], d = 1e-4 (max0 - min0) + 1e-10.
Check check_max_principle(const Trajectory& traj);

/// kappa_i > 0 at every node of every sampled state.
Check check_convexity(const Trajectory& traj);

/// 0 < r_i < r_S at every node of every sampled state.
Check check_domain(const WeightedRootSystem& S, const Trajectory& traj);

/// max_t |area(t) - area(0)| / area(0) < 1e-4.
Check check_volume(const Trajectory& traj);

/// Angular positions of the H_mod extrema of the initial state drift by
/// less than 1.5 dtheta. States whose H_mod spread is below the round-off
/// floor of the second difference are not resolvable and are excluded.
Check check_ray_invariance(const Trajectory& traj);

/// Which evolution law for H_mod the residual is measured against.
///
/// stated:    dH/dt - H_ss = G + (Hbar - H) sum m eps (alpha nu)^2 (3 cos^2 - 1) / sin^2
/// corrected: dH/dt - H_ss = G - (Hbar - H) (kappa^2 + sum m eps (alpha nu)^2 / sin^2)
///
/// where G = sum m cot_eps(alpha phi) alpha(grad H) and the trigonometric
/// functions are evaluated at sqrt(eps) alpha(phi). The corrected form keeps
/// the Euclidean |A|^2 term of the classical law.
enum class EvolutionForm { stated, corrected };

/// Coefficient of (Hbar - H) on the right side at an interior point phi
/// with unit normal nu; kappa is only used by the corrected form.
double evolution_coefficient(const WeightedRootSystem& S, const Vec& phi, const Vec& nu, double kappa,
                             EvolutionForm form);

struct ResidualStats {
  double max_residual = 0.0;
  double max_lhs = 0.0;  // scale of dH/dt - H_ss over the window
  int states_used = 0;
};

/// Max residual over interior nodes and the interior of a window of states
/// sampled at consecutive steps. Time derivatives are taken following the
/// normal motion (the angular drift of material points is removed).
ResidualStats hs_evolution_residual(const WeightedRootSystem& S, const Trajectory& traj, EvolutionForm form);

/// Runs `window` steps at n and at 2n (dt follows the cfl rule) and passes
/// iff the residual decreases by a factor of at least 2.
Check check_hs_evolution_residual(const WeightedRootSystem& S, const FlowConfig& coarse, int window,
                                  EvolutionForm form);

/// Runs the flow at each radius; passes iff converged H_bar is strictly
/// decreasing with margin 1e-6 H_bar. Inconclusive if any run fails to
/// converge.
Check check_h_monotone(const WeightedRootSystem& S, const std::vector<double>& radii, const FlowConfig& base);

/// The converged H_bar lies inside [b_min, b_max] + (l - 1)/r widened by tol
/// (epsilon = -1 only).
Check check_b_window(const WeightedRootSystem& S, double r, double H_final, double rel_tol);

}  // namespace weylflow
