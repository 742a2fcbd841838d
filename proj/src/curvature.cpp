#include "weylflow/curvature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/bernoulli.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/factorials.hpp>
#include <boost/random/sobol.hpp>
#include <fmt/format.h>

namespace weylflow {

double detail::cot_eps_series(double x, int epsilon) {
  const double e = static_cast<double>(epsilon);
  const double x2 = x * x;
  return 1.0 / x - e * x / 3.0 - x * x2 / 45.0 - 2.0 * e * x * x2 * x2 / 945.0;
}

double cot_eps(double x, int epsilon) {
  if (x == 0.0) throw DomainError("cot_eps: pole at x = 0");
  if (epsilon == 1 && std::abs(x) >= std::numbers::pi)
    throw DomainError(fmt::format("cot_eps: |x| = {} leaves (0, pi) for epsilon = +1", std::abs(x)));
  if (std::abs(x) < 1e-4) return detail::cot_eps_series(x, epsilon);
  return epsilon == 1 ? 1.0 / std::tan(x) : 1.0 / std::tanh(x);
}

double rho_point(const WeightedRootSystem& S, const Vec& phi, const Vec& nu, double wall_tolerance) {
  const double r = phi.norm();
  if (r == 0.0) throw DomainError("rho_point: phi = 0");
  if (!(r < S.r_S())) throw DomainError(fmt::format("rho_point: |phi| = {} is outside B_S (r_S = {})", r, S.r_S()));
  if (std::abs(nu.norm() - 1.0) > 1e-10) throw std::invalid_argument("rho_point: nu must be a unit vector");

  const auto& roots = S.positive_roots();
  const auto& mults = S.multiplicities();
  double rho = 0.0;
  for (std::size_t i = 0; i < roots.size(); ++i) {
    if (mults[i] == 0) continue;
    const double a_phi = roots[i](phi);
    if (std::abs(a_phi) < wall_tolerance * roots[i].norm() * r) {
      rho += mults[i] / r;
    } else {
      rho += mults[i] * roots[i](nu) * cot_eps(a_phi, S.epsilon());
    }
  }
  return rho;
}

CurvatureSample sphere_H(const WeightedRootSystem& S, double r, const Vec& Z, double wall_tolerance) {
  if (!(r > 0.0 && r < S.r_S())) throw DomainError(fmt::format("sphere_H: radius {} outside (0, r_S)", r));
  if (std::abs(Z.norm() - 1.0) > 1e-10) throw std::invalid_argument("sphere_H: Z must be a unit vector");
  if (!in_closed_chamber(S, Z, 1e-12)) throw std::invalid_argument("sphere_H: Z lies outside the closed chamber");

  CurvatureSample out;
  out.direction = Z;
  out.radius = r;
  // Pairs the roots with Z once and scales by r, so near a wall the ratio
  // alpha(Z) / alpha(rZ) stays 1/r instead of inheriting two independent
  // roundings.
  const auto& roots = S.positive_roots();
  const auto& mults = S.multiplicities();
  out.rho = 0.0;
  for (std::size_t i = 0; i < roots.size(); ++i) {
    const double aZ = roots[i](Z);
    const bool on_wall = std::abs(aZ) < wall_tolerance * roots[i].norm();
    if (on_wall) out.boundary_roots.push_back(static_cast<int>(i));
    if (mults[i] == 0) continue;
    if (on_wall) {
      out.rho += mults[i] / r;
    } else {
      out.rho += mults[i] * aZ * cot_eps(r * aZ, S.epsilon());
    }
  }
  out.H = out.rho + (S.rank() - 1) / r;
  return out;
}

double lifted_H(const WeightedRootSystem& S, const Vec& phi, const Vec& nu, double euclidean_H) {
  return rho_point(S, phi, nu) + euclidean_H;
}

namespace {

Vec direction(double theta) {
  Vec z(2);
  z << std::cos(theta), std::sin(theta);
  return z;
}

// Golden-section search for a minimizer of g on [a, b].
double golden_section(const std::function<double(double)>& g, double a, double b, int iterations) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double gc = g(c);
  double gd = g(d);
  for (int it = 0; it < iterations; ++it) {
    if (gc < gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - inv_phi * (b - a);
      gc = g(c);
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + inv_phi * (b - a);
      gd = g(d);
    }
  }
  return gc < gd ? c : d;
}

detail::Extremes arc_extremes(const WeightedRootSystem& S, const std::function<double(const Vec&)>& f,
                              int n_samples) {
  const ChamberArc arc = chamber_arc(S);
  const int n = std::max(n_samples, 3);
  const double h = arc.width() / (n - 1);
  std::vector<double> values(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const double theta = j == n - 1 ? arc.theta_hi : arc.theta_lo + j * h;
    values[static_cast<std::size_t>(j)] = f(direction(theta));
  }
  const auto imin = static_cast<int>(std::min_element(values.begin(), values.end()) - values.begin());
  const auto imax = static_cast<int>(std::max_element(values.begin(), values.end()) - values.begin());

  auto theta_at = [&](int j) { return j == n - 1 ? arc.theta_hi : arc.theta_lo + j * h; };
  auto refine = [&](int j, double sign, double& best_value, double& best_theta) {
    const double a = theta_at(std::max(j - 1, 0));
    const double b = theta_at(std::min(j + 1, n - 1));
    const double t = golden_section([&](double th) { return sign * f(direction(th)); }, a, b, 60);
    const double v = f(direction(t));
    best_theta = theta_at(j);
    best_value = values[static_cast<std::size_t>(j)];
    if (sign * v < sign * best_value) {
      best_value = v;
      best_theta = t;
    }
  };
  detail::Extremes e;
  double tmin = 0.0, tmax = 0.0;
  refine(imin, 1.0, e.min_value, tmin);
  refine(imax, -1.0, e.max_value, tmax);
  e.argmin = direction(tmin);
  e.argmax = direction(tmax);
  return e;
}

detail::Extremes cone_extremes(const WeightedRootSystem& S, const std::function<double(const Vec&)>& f,
                               int n_samples) {
  const int l = S.rank();
  boost::random::sobol gen(static_cast<std::size_t>(l));
  gen.discard(static_cast<std::uintmax_t>(l));  // the first point is the origin of the cube
  detail::Extremes e;
  e.min_value = std::numeric_limits<double>::infinity();
  e.max_value = -std::numeric_limits<double>::infinity();
  Vec g(l);
  for (int k = 0; k < n_samples; ++k) {
    for (int i = 0; i < l; ++i) {
      const double u = std::clamp(std::ldexp(static_cast<double>(gen()), -64), 1e-12, 1.0 - 1e-12);
      g[i] = std::numbers::sqrt2 * boost::math::erf_inv(2.0 * u - 1.0);
    }
    if (g.norm() < 1e-12) continue;
    const Vec z = fold_to_chamber(S, g.normalized()).v;
    const double v = f(z);
    if (v < e.min_value) {
      e.min_value = v;
      e.argmin = z;
    }
    if (v > e.max_value) {
      e.max_value = v;
      e.argmax = z;
    }
  }

  // Coordinate refinement with a shrinking step, 200 sweeps.
  auto refine = [&](Vec z, double value, double sign) {
    double step = 0.5 * std::pow(static_cast<double>(n_samples), -1.0 / (l - 1));
    for (int sweep = 0; sweep < 200; ++sweep) {
      bool improved = false;
      for (int i = 0; i < l; ++i)
        for (double s : {1.0, -1.0}) {
          Vec cand = z;
          cand[i] += s * step;
          if (cand.norm() < 1e-12) continue;
          cand = fold_to_chamber(S, cand.normalized()).v;
          const double v = f(cand);
          if (sign * v < sign * value) {
            value = v;
            z = cand;
            improved = true;
          }
        }
      if (!improved) step *= 0.5;
    }
    return std::make_pair(z, value);
  };
  std::tie(e.argmin, e.min_value) = refine(e.argmin, e.min_value, 1.0);
  std::tie(e.argmax, e.max_value) = refine(e.argmax, e.max_value, -1.0);
  return e;
}

}  // namespace

detail::Extremes detail::chamber_extremes(const WeightedRootSystem& S,
                                          const std::function<double(const Vec&)>& f, int n_samples) {
  return S.rank() == 2 ? arc_extremes(S, f, n_samples) : cone_extremes(S, f, n_samples);
}

EtaBounds eta_bounds(const WeightedRootSystem& S, double s, int n_samples) {
  if (!(s > 0.0 && s < S.r_S())) throw DomainError(fmt::format("eta_bounds: radius {} outside (0, r_S)", s));
  if (n_samples < 100) throw std::invalid_argument("eta_bounds: n_samples must be at least 100");
  const auto f = [&](const Vec& z) { return sphere_H(S, s, z).H; };
  const auto coarse = detail::chamber_extremes(S, f, n_samples);
  const auto fine = detail::chamber_extremes(S, f, 2 * n_samples);
  EtaBounds out;
  out.radius = s;
  const auto& lo = fine.min_value <= coarse.min_value ? fine : coarse;
  const auto& hi = fine.max_value >= coarse.max_value ? fine : coarse;
  out.eta_min = lo.min_value;
  out.argmin_dir = lo.argmin;
  out.eta_max = hi.max_value;
  out.argmax_dir = hi.argmax;
  return out;
}

Limits b_limits(const WeightedRootSystem& S, int n_samples) {
  if (S.epsilon() != -1) throw std::invalid_argument("b_limits: defined only for epsilon = -1");
  const auto& roots = S.positive_roots();
  const auto& mults = S.multiplicities();
  const auto f = [&](const Vec& z) {
    double sum = 0.0;
    for (std::size_t i = 0; i < roots.size(); ++i) sum += mults[i] * std::abs(roots[i](z));
    return sum;
  };
  const auto coarse = detail::chamber_extremes(S, f, n_samples);
  const auto fine = detail::chamber_extremes(S, f, 2 * n_samples);
  return {std::min(coarse.min_value, fine.min_value), std::max(coarse.max_value, fine.max_value)};
}

namespace {

constexpr double kPsiSeriesCutoff = 1.0;

// x cot_eps(x) - 1, accurate relative to its own size near 0. The series
// x cot x = sum (-1)^k 4^k B_2k x^2k / (2k)! converges for |x| < pi; the
// coth series drops the sign.
double x_cot_eps_minus_one(double x, int epsilon) {
  if (std::abs(x) >= kPsiSeriesCutoff) return x * cot_eps(x, epsilon) - 1.0;
  static const std::array<double, 24> coeff = [] {
    std::array<double, 24> c{};
    for (std::size_t k = 1; k <= c.size(); ++k) {
      const int n = static_cast<int>(k);
      c[k - 1] = std::ldexp(boost::math::bernoulli_b2n<double>(n), 2 * n) / boost::math::factorial<double>(2 * k);
    }
    return c;
  }();
  const double x2 = x * x;
  double sum = 0.0, power = 1.0;
  for (std::size_t k = 1; k <= coeff.size(); ++k) {
    power *= x2;
    const double sign = epsilon == 1 && k % 2 == 1 ? -1.0 : 1.0;
    const double term = sign * coeff[k - 1] * power;
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

}  // namespace

double theta_GK(const WeightedRootSystem& S) {
  if (S.rank() != 2) throw std::invalid_argument("theta_GK: only rank 2 is supported");
  return chamber_arc(S).width();
}

Theta0 theta0(const WeightedRootSystem& S, double r, int grid_n) {
  if (S.rank() != 2) throw std::invalid_argument("theta0: only rank 2 is supported");
  if (!(r > 0.0 && r < S.r_S())) throw DomainError(fmt::format("theta0: radius {} outside (0, r_S)", r));
  if (grid_n < 2) throw std::invalid_argument("theta0: grid_n must be at least 2");
  const ChamberArc arc = chamber_arc(S);
  const double h = arc.width() / grid_n;
  // rho on the round sphere equals sum m / r plus the sampled function below,
  // which carries the angular variation without the 1/r offset.
  const auto& roots = S.positive_roots();
  const auto& mults = S.multiplicities();
  std::vector<double> rho(static_cast<std::size_t>(grid_n + 1));
  double tol = 0.0;
  for (int j = 0; j <= grid_n; ++j) {
    const Vec z = direction(j == grid_n ? arc.theta_hi : arc.theta_lo + j * h);
    double sum = 0.0, err = 0.0;
    for (std::size_t i = 0; i < roots.size(); ++i) {
      if (mults[i] == 0) continue;
      const double x = r * roots[i](z);
      const double p = x_cot_eps_minus_one(x, S.epsilon());
      sum += mults[i] * p / r;
      err += mults[i] * (std::abs(p) + (std::abs(x) < kPsiSeriesCutoff ? 0.0 : 1.0)) / r;
    }
    rho[static_cast<std::size_t>(j)] = sum;
    tol = std::max(tol, 16.0 * std::numeric_limits<double>::epsilon() * err);
  }

  struct Extremum {
    int node;
    bool is_max;
  };
  // Hysteresis scan: a run ends once the profile moves back by more than tol
  // from the run's extreme, which is then recorded. The walls are even
  // reflection lines, so the first and last runs end in extrema there.
  std::vector<Extremum> ext;
  const auto f = [&](int j) { return rho[static_cast<std::size_t>(j)]; };
  int hi = 0, lo = 0, cand = 0, dir = 0;
  for (int j = 1; j <= grid_n; ++j) {
    if (dir == 0) {
      if (f(j) > f(hi)) hi = j;
      if (f(j) < f(lo)) lo = j;
      if (f(hi) - f(lo) > tol) {
        ext.push_back({hi < lo ? hi : lo, hi < lo});
        dir = hi < lo ? -1 : 1;
        cand = hi < lo ? lo : hi;
      }
    } else if (dir > 0) {
      if (f(j) > f(cand)) cand = j;
      else if (f(cand) - f(j) > tol) {
        ext.push_back({cand, true});
        dir = -1;
        cand = j;
      }
    } else {
      if (f(j) < f(cand)) cand = j;
      else if (f(j) - f(cand) > tol) {
        ext.push_back({cand, false});
        dir = 1;
        cand = j;
      }
    }
  }
  if (dir != 0) ext.push_back({cand, dir > 0});
  const bool has_max = std::any_of(ext.begin(), ext.end(), [](const Extremum& e) { return e.is_max; });
  const bool has_min = std::any_of(ext.begin(), ext.end(), [](const Extremum& e) { return !e.is_max; });
  if (!has_max || !has_min) return {0.0, true};

  double best = 0.0;
  for (std::size_t k = 0; k < ext.size(); ++k) {
    if (!ext[k].is_max) continue;
    // Nearest minimum on each side.
    for (int dir : {-1, 1}) {
      for (auto m = static_cast<std::ptrdiff_t>(k) + dir; m >= 0 && m < static_cast<std::ptrdiff_t>(ext.size()); m += dir) {
        if (!ext[static_cast<std::size_t>(m)].is_max) {
          best = std::max(best, std::abs(ext[static_cast<std::size_t>(m)].node - ext[k].node) * h);
          break;
        }
      }
    }
  }
  return {best, false};
}

std::vector<SphereProfileRow> sphere_profile(const WeightedRootSystem& S, double r, int n) {
  if (n < 1) throw std::invalid_argument("sphere_profile: n must be positive");
  const ChamberArc arc = chamber_arc(S);
  std::vector<SphereProfileRow> rows;
  for (int j = 0; j <= n; ++j) {
    const double theta = j == n ? arc.theta_hi : arc.theta_lo + j * arc.width() / n;
    const auto sample = sphere_H(S, r, direction(theta));
    rows.push_back({theta, sample.H, sample.rho, !sample.boundary_roots.empty()});
  }
  return rows;
}

nlohmann::json to_json(const EtaBounds& e) {
  auto vec = [](const Vec& v) {
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
  };
  return {{"eta_min", e.eta_min}, {"eta_max", e.eta_max}, {"argmin_dir", vec(e.argmin_dir)},
          {"argmax_dir", vec(e.argmax_dir)}, {"radius", e.radius}};
}

}  // namespace weylflow
