#include "weylflow/rootsys.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <queue>

#include <fmt/format.h>

namespace weylflow {

namespace {

constexpr double kRootMatchTol = 1e-9;

Vec unit(int dim, int i, double scale = 1.0) {
  Vec v = Vec::Zero(dim);
  v[i] = scale;
  return v;
}

// Orthonormal basis of the sum-zero hyperplane in R^{l+1} (Helmert rows).
Mat helmert(int l) {
  Mat h = Mat::Zero(l, l + 1);
  for (int k = 1; k <= l; ++k) {
    const double s = 1.0 / std::sqrt(static_cast<double>(k) * (k + 1));
    for (int i = 0; i < k; ++i) h(k - 1, i) = s;
    h(k - 1, k) = -k * s;
  }
  return h;
}

std::vector<Vec> roots_pm_ei_pm_ej(int l) {
  std::vector<Vec> out;
  for (int i = 0; i < l; ++i)
    for (int j = i + 1; j < l; ++j)
      for (double si : {1.0, -1.0})
        for (double sj : {1.0, -1.0}) out.push_back(unit(l, i, si) + unit(l, j, sj));
  return out;
}

std::vector<Vec> roots_pm_ei(int l, double scale) {
  std::vector<Vec> out;
  for (int i = 0; i < l; ++i)
    for (double s : {1.0, -1.0}) out.push_back(unit(l, i, s * scale));
  return out;
}

std::vector<Vec> family_roots(Family f, int l) {
  std::vector<Vec> out;
  auto append = [&out](const std::vector<Vec>& more) { out.insert(out.end(), more.begin(), more.end()); };
  switch (f) {
    case Family::a: {
      const Mat h = helmert(l);
      for (int i = 0; i <= l; ++i)
        for (int j = 0; j <= l; ++j)
          if (i != j) out.push_back(h * (unit(l + 1, i) - unit(l + 1, j)));
      break;
    }
    case Family::b:
      append(roots_pm_ei_pm_ej(l));
      append(roots_pm_ei(l, 1.0));
      break;
    case Family::c:
      append(roots_pm_ei_pm_ej(l));
      append(roots_pm_ei(l, 2.0));
      break;
    case Family::d:
      append(roots_pm_ei_pm_ej(l));
      break;
    case Family::bc:
      append(roots_pm_ei_pm_ej(l));
      append(roots_pm_ei(l, 1.0));
      append(roots_pm_ei(l, 2.0));
      break;
    case Family::g2: {
      const Mat h = helmert(2);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          if (i == j) continue;
          out.push_back(h * (unit(3, i) - unit(3, j)));
        }
      for (int i = 0; i < 3; ++i) {
        Vec v = 2.0 * unit(3, i);
        for (int j = 0; j < 3; ++j)
          if (j != i) v -= unit(3, j);
        out.push_back(h * v);
        out.push_back(-(h * v));
      }
      break;
    }
    case Family::f4: {
      append(roots_pm_ei_pm_ej(4));
      append(roots_pm_ei(4, 1.0));
      for (int mask = 0; mask < 16; ++mask) {
        Vec v(4);
        for (int i = 0; i < 4; ++i) v[i] = (mask >> i) & 1 ? -0.5 : 0.5;
        out.push_back(v);
      }
      break;
    }
    case Family::custom:
      break;
  }
  return out;
}

// Root length of each orbit, in orbit_count order.
std::vector<double> orbit_lengths(Family f) {
  const double s2 = std::numbers::sqrt2;
  switch (f) {
    case Family::a:
    case Family::d:
      return {s2};
    case Family::b:
      return {s2, 1.0};
    case Family::c:
      return {s2, 2.0};
    case Family::bc:
      return {s2, 1.0, 2.0};
    case Family::g2:
      return {s2, std::sqrt(6.0)};
    case Family::f4:
      return {s2, 1.0};
    case Family::custom:
      break;
  }
  return {};
}

Vec default_regular_vector(int l) {
  Vec u(l);
  double p = 1.0;
  for (int i = 0; i < l; ++i, p *= 0.1) u[i] = p;
  return u;
}

// Index of the root in `roots` equal to +v or -v, or -1.
int find_root_up_to_sign(const std::vector<Covector>& roots, const Vec& v, double tol = kRootMatchTol) {
  for (std::size_t i = 0; i < roots.size(); ++i) {
    if ((roots[i].coeffs() - v).norm() < tol || (roots[i].coeffs() + v).norm() < tol)
      return static_cast<int>(i);
  }
  return -1;
}

struct VecLess {
  bool operator()(const Vec& a, const Vec& b) const {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      if (a[i] < b[i] - kRootMatchTol) return true;
      if (a[i] > b[i] + kRootMatchTol) return false;
    }
    return false;
  }
};

}  // namespace

std::string to_string(Family f) {
  switch (f) {
    case Family::a: return "a";
    case Family::b: return "b";
    case Family::c: return "c";
    case Family::d: return "d";
    case Family::bc: return "bc";
    case Family::g2: return "g2";
    case Family::f4: return "f4";
    case Family::custom: return "custom";
  }
  return "custom";
}

Family family_from_string(const std::string& s) {
  if (s == "a") return Family::a;
  if (s == "b") return Family::b;
  if (s == "c") return Family::c;
  if (s == "d") return Family::d;
  if (s == "bc" || s == "bd") return Family::bc;
  if (s == "g2" || s == "g") return Family::g2;
  if (s == "f4" || s == "f") return Family::f4;
  if (s == "e")
    throw std::invalid_argument("exceptional families e6/e7/e8 are not supported");
  throw std::invalid_argument(
      fmt::format("unknown root system family '{}' (supported: a, b, c, d, bc, g2, f4)", s));
}

int orbit_count(Family f) { return static_cast<int>(orbit_lengths(f).size()); }

double WeightedRootSystem::natural_radius() const {
  return std::numbers::pi / highest_root().norm();
}

int WeightedRootSystem::total_dimension_minus_one() const {
  return std::accumulate(mults_.begin(), mults_.end(), 0) + rank_ - 1;
}

std::string WeightedRootSystem::name() const {
  switch (family_) {
    case Family::g2:
    case Family::f4:
    case Family::custom:
      return to_string(family_);
    default:
      return to_string(family_) + std::to_string(rank_);
  }
}

void WeightedRootSystem::finalize() {
  regular_ = default_regular_vector(rank_);
  for (const auto& r : roots_) {
    if (std::abs(r(regular_)) < 1e-9 * r.norm())
      throw std::invalid_argument("root vanishes on the regular vector; cannot choose positive roots");
  }

  // Simple roots: positive roots that are not a sum of two positive roots.
  simple_.clear();
  for (std::size_t i = 0; i < roots_.size(); ++i) {
    bool decomposable = false;
    for (std::size_t j = 0; j < roots_.size() && !decomposable; ++j)
      for (std::size_t k = j; k < roots_.size() && !decomposable; ++k)
        decomposable = (roots_[j].coeffs() + roots_[k].coeffs() - roots_[i].coeffs()).norm() < kRootMatchTol;
    if (!decomposable) simple_.push_back(static_cast<int>(i));
  }

  highest_ = 0;
  for (std::size_t i = 1; i < roots_.size(); ++i)
    if (roots_[i](regular_) > roots_[highest_](regular_)) highest_ = i;

  r_s_ = epsilon_ == 1 ? std::numbers::pi / roots_[highest_].norm()
                       : std::numeric_limits<double>::infinity();
}

WeightedRootSystem build_system(Family family, int rank, std::span<const int> mults_per_orbit,
                                int epsilon, bool test_mode) {
  if (family == Family::custom)
    throw std::invalid_argument("custom systems are built from an explicit root list");
  if (rank <= 0) throw std::invalid_argument(fmt::format("rank must be positive (got {})", rank));
  if (rank < 2) throw std::invalid_argument("weighted root systems require rank >= 2");
  if (family == Family::g2 && rank != 2) throw std::invalid_argument("g2 has rank 2");
  if (family == Family::f4 && rank != 4) throw std::invalid_argument("f4 has rank 4");
  if (family == Family::d && rank < 3)
    throw std::invalid_argument("d_l requires rank >= 3 (d2 is reducible)");
  if (epsilon != 1 && epsilon != -1) throw std::invalid_argument("epsilon must be +1 or -1");

  const auto lengths = orbit_lengths(family);
  if (mults_per_orbit.size() != lengths.size())
    throw std::invalid_argument(fmt::format("family {} expects {} orbit multiplicities, got {}",
                                            to_string(family), lengths.size(), mults_per_orbit.size()));
  for (int m : mults_per_orbit) {
    if (m < 0) throw std::invalid_argument("multiplicities must be nonnegative");
    if (m == 0 && !test_mode)
      throw std::invalid_argument("zero multiplicity is only admitted in test mode");
  }

  WeightedRootSystem S;
  S.rank_ = rank;
  S.family_ = family;
  S.epsilon_ = epsilon;
  S.test_mode_ = test_mode;
  S.orbit_mults_.assign(mults_per_orbit.begin(), mults_per_orbit.end());

  const Vec u = default_regular_vector(rank);
  for (const Vec& v : family_roots(family, rank)) {
    if (v.dot(u) <= 0.0) continue;
    const double len = v.norm();
    int orbit = -1;
    for (std::size_t o = 0; o < lengths.size(); ++o)
      if (std::abs(lengths[o] - len) < 1e-12) orbit = static_cast<int>(o);
    if (orbit < 0) throw std::logic_error("root length does not match any orbit");
    S.roots_.emplace_back(v);
    S.orbits_.push_back(orbit);
    S.mults_.push_back(mults_per_orbit[static_cast<std::size_t>(orbit)]);
  }
  S.finalize();
  return S;
}

WeightedRootSystem build_custom_system(const std::vector<Vec>& roots, std::span<const int> mults,
                                       int epsilon, bool test_mode) {
  if (roots.empty()) throw std::invalid_argument("custom system needs at least one root");
  if (roots.size() != mults.size())
    throw std::invalid_argument("custom system needs one multiplicity per listed root");
  if (epsilon != 1 && epsilon != -1) throw std::invalid_argument("epsilon must be +1 or -1");
  const auto rank = roots.front().size();
  if (rank < 2) throw std::invalid_argument("weighted root systems require rank >= 2");

  WeightedRootSystem S;
  S.rank_ = static_cast<int>(rank);
  S.family_ = Family::custom;
  S.epsilon_ = epsilon;
  S.test_mode_ = test_mode;
  const Vec u = default_regular_vector(S.rank_);
  for (std::size_t i = 0; i < roots.size(); ++i) {
    if (roots[i].size() != static_cast<Eigen::Index>(rank))
      throw std::invalid_argument("all custom roots must have the same dimension");
    if (roots[i].norm() < 1e-12) throw std::invalid_argument("zero vector is not a root");
    if (mults[i] < 0 || (mults[i] == 0 && !test_mode))
      throw std::invalid_argument("custom multiplicities must be positive (zero only in test mode)");
    const Vec v = roots[i].dot(u) >= 0.0 ? roots[i] : Vec(-roots[i]);
    const int existing = find_root_up_to_sign(S.roots_, v);
    if (existing >= 0) {
      if (S.mults_[static_cast<std::size_t>(existing)] != mults[i])
        throw std::invalid_argument("root listed twice with different multiplicities");
      continue;
    }
    S.roots_.emplace_back(v);
    S.mults_.push_back(mults[i]);
  }

  // Orbits: union-find over reflection images that are present.
  std::vector<std::size_t> parent(S.roots_.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&parent](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& a : S.roots_) {
    const Mat s = reflection(a);
    for (std::size_t j = 0; j < S.roots_.size(); ++j) {
      const int k = find_root_up_to_sign(S.roots_, s * S.roots_[j].coeffs());
      if (k >= 0) parent[find(j)] = find(static_cast<std::size_t>(k));
    }
  }
  std::map<std::size_t, int> orbit_ids;
  for (std::size_t j = 0; j < S.roots_.size(); ++j) {
    auto it = orbit_ids.try_emplace(find(j), static_cast<int>(orbit_ids.size())).first;
    S.orbits_.push_back(it->second);
  }
  S.finalize();
  return S;
}

Mat reflection(const Covector& alpha) {
  const Vec& a = alpha.coeffs();
  return Mat::Identity(a.size(), a.size()) - 2.0 * a * a.transpose() / a.squaredNorm();
}

WeylGroup weyl_group(const WeightedRootSystem& S, std::size_t cap) {
  WeylGroup W;
  for (int i : S.simple_root_indices())
    W.generators.push_back(reflection(S.positive_roots()[static_cast<std::size_t>(i)]));

  // Elements are keyed by the image of the regular vector: W acts simply
  // transitively on chambers, so distinct elements have distinct images.
  const Vec& u = S.regular_vector();
  std::map<Vec, std::size_t, VecLess> seen;
  const Mat id = Mat::Identity(S.rank(), S.rank());
  W.elements.push_back(id);
  seen.emplace(u, 0);
  std::queue<std::size_t> frontier;
  frontier.push(0);
  while (!frontier.empty()) {
    const std::size_t cur = frontier.front();
    frontier.pop();
    for (const Mat& g : W.generators) {
      Mat next = g * W.elements[cur];
      const Vec key = next * u;
      if (seen.contains(key)) continue;
      if (W.elements.size() >= cap)
        throw std::runtime_error(fmt::format(
            "Weyl group closure exceeded {} elements; the root set is not a valid root system", cap));
      seen.emplace(key, W.elements.size());
      W.elements.push_back(std::move(next));
      frontier.push(W.elements.size() - 1);
    }
  }
  return W;
}

bool in_closed_chamber(const WeightedRootSystem& S, const Vec& v, double tol) {
  const double vn = v.norm();
  return std::all_of(S.positive_roots().begin(), S.positive_roots().end(),
                     [&](const Covector& a) { return a(v) >= -tol * a.norm() * vn; });
}

Folded fold_to_chamber(const WeightedRootSystem& S, const Vec& v) {
  if (v.norm() == 0.0) throw std::invalid_argument("cannot fold the zero vector");
  Folded out{Mat::Identity(S.rank(), S.rank()), v};
  const double tol = 1e-12 * v.norm();
  // Each reflection in a simple root negative on v strictly decreases the
  // number of positive roots negative on v, so this terminates.
  for (std::size_t guard = 0; guard < 100000; ++guard) {
    bool reflected = false;
    for (int i : S.simple_root_indices()) {
      const Covector& a = S.positive_roots()[static_cast<std::size_t>(i)];
      if (a(out.v) < -tol * a.norm()) {
        const Mat s = reflection(a);
        out.v = s * out.v;
        out.w = s * out.w;
        reflected = true;
        break;
      }
    }
    if (!reflected) return out;
  }
  throw std::runtime_error("fold_to_chamber did not terminate; invalid root system");
}

ChamberArc chamber_arc(const WeightedRootSystem& S) {
  if (S.rank() != 2) throw std::invalid_argument("chamber_arc requires a rank-2 system");
  const auto& simple = S.simple_root_indices();
  if (simple.size() != 2) throw std::invalid_argument("rank-2 system must have two simple roots");
  const Vec a1 = S.positive_roots()[static_cast<std::size_t>(simple[0])].coeffs();
  const Vec a2 = S.positive_roots()[static_cast<std::size_t>(simple[1])].coeffs();

  // Wall direction of a1 on the side where a2 is positive, and vice versa.
  auto wall_dir = [](const Vec& a, const Vec& other) {
    Vec w(2);
    w << -a[1], a[0];
    w.normalize();
    if (other.dot(w) < 0.0) w = -w;
    return w;
  };
  const Vec w1 = wall_dir(a1, a2);
  const Vec w2 = wall_dir(a2, a1);
  const double cross = w1[0] * w2[1] - w1[1] * w2[0];
  const double width = std::acos(std::clamp(w1.dot(w2), -1.0, 1.0));
  const Vec& start = cross > 0.0 ? w1 : w2;
  ChamberArc arc;
  arc.theta_lo = std::atan2(start[1], start[0]);
  arc.theta_hi = arc.theta_lo + width;
  return arc;
}

bool SystemDiagnostics::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const AxiomCheck& c) { return c.pass; });
}

SystemDiagnostics validate_system(const WeightedRootSystem& S) {
  SystemDiagnostics d;
  const auto& roots = S.positive_roots();
  const auto& mults = S.multiplicities();

  // Reflection closure of Delta = Delta_+ u -Delta_+.
  {
    double worst = 0.0;
    for (const auto& a : roots) {
      const Mat s = reflection(a);
      for (const auto& b : roots) {
        const Vec img = s * b.coeffs();
        double best = std::numeric_limits<double>::infinity();
        for (const auto& c : roots)
          best = std::min({best, (img - c.coeffs()).norm(), (img + c.coeffs()).norm()});
        worst = std::max(worst, best);
      }
    }
    d.checks.push_back({"reflection_closure", worst < 1e-10, worst});
  }

  // Multiplicities constant along reflection images.
  {
    double worst = 0.0;
    for (const auto& a : roots) {
      const Mat s = reflection(a);
      for (std::size_t j = 0; j < roots.size(); ++j) {
        const int k = find_root_up_to_sign(roots, s * roots[j].coeffs());
        if (k < 0) continue;
        worst = std::max(worst, std::abs(static_cast<double>(mults[j] - mults[static_cast<std::size_t>(k)])));
      }
    }
    d.checks.push_back({"multiplicity_weyl_invariance", worst == 0.0, worst});
  }

  {
    double min_pairing = std::numeric_limits<double>::infinity();
    for (const auto& a : roots) min_pairing = std::min(min_pairing, a(S.regular_vector()) / a.norm());
    d.checks.push_back({"positivity_on_regular_vector", min_pairing > 0.0, min_pairing});
  }

  {
    Mat m(S.rank(), static_cast<Eigen::Index>(roots.size()));
    for (std::size_t i = 0; i < roots.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = roots[i].coeffs();
    Eigen::FullPivLU<Mat> lu(m);
    lu.setThreshold(1e-10);
    const auto deficit = static_cast<double>(S.rank() - lu.rank());
    d.checks.push_back({"roots_span_V", deficit == 0.0, deficit});
  }

  {
    double worst = 0.0;
    for (const auto& a : roots)
      for (const auto& b : roots) {
        const double cartan = 2.0 * a.coeffs().dot(b.coeffs()) / b.coeffs().squaredNorm();
        worst = std::max(worst, std::abs(cartan - std::round(cartan)));
      }
    d.checks.push_back({"crystallographic", worst < 1e-10, worst});
  }

  {
    double worst = 0.0;
    for (const auto& a : roots) worst = std::max(worst, a.norm() - S.highest_root().norm());
    d.checks.push_back({"highest_root_maximal", worst <= 1e-12, worst});
  }

  {
    const int min_m = *std::min_element(mults.begin(), mults.end());
    const bool ok = min_m > 0 || (min_m == 0 && S.test_mode());
    d.checks.push_back({"multiplicities_admissible", ok, static_cast<double>(min_m)});
  }
  return d;
}

WeightedRootSystem system_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("system: expected a JSON object");
  for (const auto& [key, _] : j.items()) {
    static const std::vector<std::string> allowed{"family", "rank", "mults", "epsilon", "roots", "test_mode"};
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw std::invalid_argument(fmt::format("system.{}: unknown key", key));
  }
  auto get_int = [&j](const char* key) -> int {
    if (!j.contains(key)) throw std::invalid_argument(fmt::format("system.{}: missing", key));
    if (!j.at(key).is_number_integer()) throw std::invalid_argument(fmt::format("system.{}: expected an integer", key));
    return j.at(key).get<int>();
  };
  const int epsilon = get_int("epsilon");
  const bool test_mode = j.value("test_mode", false);
  if (!j.contains("mults") || !j.at("mults").is_array())
    throw std::invalid_argument("system.mults: expected an array of integers");
  std::vector<int> mults;
  for (std::size_t i = 0; i < j.at("mults").size(); ++i) {
    if (!j.at("mults")[i].is_number_integer())
      throw std::invalid_argument(fmt::format("system.mults[{}]: expected an integer", i));
    mults.push_back(j.at("mults")[i].get<int>());
  }

  if (j.contains("roots")) {
    if (j.contains("family")) throw std::invalid_argument("system: give either 'family' or 'roots', not both");
    std::vector<Vec> roots;
    for (std::size_t i = 0; i < j.at("roots").size(); ++i) {
      const auto& r = j.at("roots")[i];
      if (!r.is_array()) throw std::invalid_argument(fmt::format("system.roots[{}]: expected an array", i));
      Vec v(static_cast<Eigen::Index>(r.size()));
      for (std::size_t k = 0; k < r.size(); ++k) {
        if (!r[k].is_number()) throw std::invalid_argument(fmt::format("system.roots[{}][{}]: expected a number", i, k));
        v[static_cast<Eigen::Index>(k)] = r[k].get<double>();
      }
      roots.push_back(v);
    }
    return build_custom_system(roots, mults, epsilon, test_mode);
  }

  if (!j.contains("family") || !j.at("family").is_string())
    throw std::invalid_argument("system.family: expected a string such as \"a2\"");
  const std::string tag = j.at("family").get<std::string>();
  std::size_t split = 0;
  while (split < tag.size() && std::isalpha(static_cast<unsigned char>(tag[split]))) ++split;
  const std::string letters = tag.substr(0, split);
  const std::string digits = tag.substr(split);
  Family family;
  std::optional<int> tag_rank;
  if (tag == "g2" || tag == "f4") {
    family = family_from_string(tag);
    tag_rank = tag == "g2" ? 2 : 4;
  } else {
    try {
      family = family_from_string(letters);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(fmt::format("system.family: {}", e.what()));
    }
    if (!digits.empty()) {
      if (!std::all_of(digits.begin(), digits.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
        throw std::invalid_argument(fmt::format("system.family: malformed tag '{}'", tag));
      tag_rank = std::stoi(digits);
    }
  }
  int rank = 0;
  if (j.contains("rank")) {
    rank = get_int("rank");
    if (tag_rank && *tag_rank != rank)
      throw std::invalid_argument(fmt::format("system.rank: {} contradicts family tag '{}'", rank, tag));
  } else if (tag_rank) {
    rank = *tag_rank;
  } else {
    throw std::invalid_argument("system.rank: missing");
  }
  return build_system(family, rank, mults, epsilon, test_mode);
}

nlohmann::json system_to_json(const WeightedRootSystem& S) {
  nlohmann::json j;
  j["epsilon"] = S.epsilon();
  if (S.test_mode()) j["test_mode"] = true;
  if (S.family() == Family::custom) {
    nlohmann::json roots = nlohmann::json::array();
    for (const auto& r : S.positive_roots()) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index i = 0; i < r.dim(); ++i) row.push_back(r.coeffs()[i]);
      roots.push_back(row);
    }
    j["roots"] = roots;
    j["mults"] = S.multiplicities();
  } else {
    j["family"] = S.name();
    j["rank"] = S.rank();
    j["mults"] = S.orbit_multiplicities();
  }
  return j;
}

}  // namespace weylflow
