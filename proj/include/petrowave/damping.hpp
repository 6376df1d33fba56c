#pragma once

// Nonlinear damping laws g and their convex comparison function G.
//
// The built-in family is g(s) = s^p (-ln s)^q on (0, eps], extended to an odd
// function of s and continued C1-linearly for s > eps, with
//   g'(s) = s^(p-1) (-ln s)^(q-1) (p(-ln s) - q)          (q != 0)
//   g'(s) = p s^(p-1)                                     (q == 0).
// The companion comparison function is
//   G(s)  = c s^((p+1)/2) (-ln sqrt(s))^q                 on (0, eps^2]
//   G'(s) = c s^((p-1)/2) (-ln sqrt(s))^(q-1) ((p+1)/2 (-ln sqrt(s)) - q/2),
// continued C1-linearly past eps^2 so that G and its inverse stay evaluable
// wherever the origin-comparison check needs them.  For p = 1, q > 0 this G is
// concave (G' decreasing); construction still succeeds, the convexity verdict
// is sampled and carried on the object, and the Legendre transform refuses to
// run on a non-convex branch.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "petrowave/quadrature.hpp"

namespace petrowave {

enum class DampingKind { linear, power_log, custom };

struct DampingLaw {
  DampingKind kind = DampingKind::linear;
  double p = 1.0;
  double q = 0.0;
  double epsilon = 1.0;
  double tau1 = 1.0;  // global lower bound claimed for g'
  double tau2 = 1.0;  // global upper bound claimed for g'
  double c1 = 1.0;    // claimed linear growth bounds outside [-eps, eps]
  double c2 = 1.0;
  std::function<double(double)> g;
  std::function<double(double)> dg;
};

namespace detail {

inline double powlog_g(double p, double q, double x) {
  // x in (0, eps]; caller handles sign and the linear continuation
  if (x <= 0.0) return 0.0;
  if (q == 0.0) return std::pow(x, p);
  return std::pow(x, p) * std::pow(-std::log(x), q);
}

inline double powlog_dg(double p, double q, double x) {
  if (x <= 0.0) {
    if (p > 1.0) return 0.0;
    if (q == 0.0) return 1.0;
    return q > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  }
  if (q == 0.0) return p * std::pow(x, p - 1.0);
  const double u = -std::log(x);
  return std::pow(x, p - 1.0) * std::pow(u, q - 1.0) * (p * u - q);
}

}  // namespace detail

// Family constructor.  Fitted defaults:
//   tau1 = g'(eps)   (the continuation slope; also the global infimum claim),
//   tau2 = max of g' over a log grid of (0, eps],
//   c1, c2 = exact bounds of g(s)/s on (eps, inf), namely min/max of
//            {g(eps)/eps, g'(eps)} since the ratio is monotone there.
// Callers may override the claimed bounds afterwards; check_hypotheses then
// reports against the overridden values.
inline DampingLaw make_power_log(double p, double q, double epsilon) {
  if (!(p >= 1.0)) throw std::invalid_argument("make_power_log: p must be >= 1");
  if (!(epsilon > 0.0))
    throw std::invalid_argument("make_power_log: epsilon must be positive");
  if (q == 0.0) {
    if (epsilon > 1.0)
      throw std::invalid_argument("make_power_log: epsilon must be <= 1");
  } else {
    if (!(epsilon < 1.0))
      throw std::invalid_argument(
          "make_power_log: epsilon must be < 1 when q != 0");
    if (p * (-std::log(epsilon)) - q < 0.0)
      throw std::invalid_argument(
          "make_power_log: g' changes sign on (0, eps]; shrink epsilon");
  }

  DampingLaw law;
  law.kind = (p == 1.0 && q == 0.0) ? DampingKind::linear : DampingKind::power_log;
  law.p = p;
  law.q = q;
  law.epsilon = epsilon;

  if (law.kind == DampingKind::linear) {
    law.g = [](double s) { return s; };
    law.dg = [](double) { return 1.0; };
    law.tau1 = law.tau2 = 1.0;
    law.c1 = law.c2 = 1.0;
    return law;
  }

  const double g_eps = detail::powlog_g(p, q, epsilon);
  const double dg_eps = detail::powlog_dg(p, q, epsilon);
  law.g = [p, q, epsilon, g_eps, dg_eps](double s) {
    const double a = std::fabs(s);
    const double sign = (s < 0.0) ? -1.0 : 1.0;
    if (a <= epsilon) return sign * detail::powlog_g(p, q, a);
    return sign * (g_eps + dg_eps * (a - epsilon));
  };
  law.dg = [p, q, epsilon, dg_eps](double s) {
    const double a = std::fabs(s);
    return (a <= epsilon) ? detail::powlog_dg(p, q, a) : dg_eps;
  };

  law.tau1 = dg_eps;
  double dg_max = dg_eps;
  for (int i = 0; i <= 600; ++i) {
    const double x = epsilon * std::pow(1e-13, 1.0 - i / 600.0);
    dg_max = std::max(dg_max, detail::powlog_dg(p, q, x));
  }
  law.tau2 = dg_max;
  law.c1 = std::min(g_eps / epsilon, dg_eps);
  law.c2 = std::max(g_eps / epsilon, dg_eps);
  return law;
}

inline DampingLaw make_linear() { return make_power_log(1.0, 0.0, 1.0); }

inline DampingLaw make_custom(std::function<double(double)> g,
                              std::function<double(double)> dg, double epsilon,
                              double tau1, double tau2, double c1, double c2) {
  if (!g || !dg) throw std::invalid_argument("make_custom: missing evaluators");
  DampingLaw law;
  law.kind = DampingKind::custom;
  law.epsilon = epsilon;
  law.tau1 = tau1;
  law.tau2 = tau2;
  law.c1 = c1;
  law.c2 = c2;
  law.g = std::move(g);
  law.dg = std::move(dg);
  return law;
}

struct GFunction {
  std::function<double(double)> G;   // defined on [0, inf)
  std::function<double(double)> dG;  // capped at the continuation slope
  bool linear = true;                // G linear on [0, s_max]
  bool strictly_convex = false;      // sampled verdict on (0, s_max]
  double c_G = 1.0;
  double s_max = std::numeric_limits<double>::infinity();
  double G_at_smax = 0.0;     // formula value at s_max (continuation anchor)
  double slope_at_smax = 0.0; // continuation slope = dG(s_max)
};

inline GFunction make_G(const DampingLaw& law, double c_G) {
  if (law.kind == DampingKind::custom)
    throw std::invalid_argument(
        "make_G: custom laws need an explicit comparison function");
  if (!(c_G > 0.0)) throw std::invalid_argument("make_G: c_G must be positive");

  GFunction Gf;
  Gf.c_G = c_G;
  if (law.kind == DampingKind::linear) {
    Gf.linear = true;
    Gf.strictly_convex = false;
    Gf.slope_at_smax = c_G;
    Gf.G = [c_G](double s) { return c_G * s; };
    Gf.dG = [c_G](double) { return c_G; };
    return Gf;
  }

  const double p = law.p, q = law.q;
  const double s_max = law.epsilon * law.epsilon;
  auto core = [p, q, c_G](double x) {
    if (x <= 0.0) return 0.0;
    if (q == 0.0) return c_G * std::pow(x, 0.5 * (p + 1.0));
    const double u = -0.5 * std::log(x);
    return c_G * std::pow(x, 0.5 * (p + 1.0)) * std::pow(u, q);
  };
  auto dcore = [p, q, c_G](double x) {
    if (x <= 0.0) {
      if (p > 1.0) return 0.0;
      if (q == 0.0) return c_G;
      return q > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    }
    if (q == 0.0) return c_G * 0.5 * (p + 1.0) * std::pow(x, 0.5 * (p - 1.0));
    const double u = -0.5 * std::log(x);
    return c_G * std::pow(x, 0.5 * (p - 1.0)) * std::pow(u, q - 1.0) *
           (0.5 * (p + 1.0) * u - 0.5 * q);
  };

  Gf.linear = false;
  Gf.s_max = s_max;
  Gf.G_at_smax = core(s_max);
  Gf.slope_at_smax = dcore(s_max);
  const double G_anchor = Gf.G_at_smax;
  const double slope = Gf.slope_at_smax;
  Gf.G = [core, s_max, G_anchor, slope](double x) {
    if (x <= s_max) return core(x);
    return G_anchor + slope * (x - s_max);
  };
  Gf.dG = [dcore, s_max, slope](double x) {
    if (x <= s_max) return dcore(x);
    return slope;
  };

  // sampled convexity verdict: dG non-decreasing along a log grid of (0, s_max]
  bool convex = true;
  double prev = dcore(s_max * 1e-13);
  for (int i = 1; i <= 400; ++i) {
    const double x = s_max * std::pow(1e-13, 1.0 - i / 400.0);
    const double cur = dcore(x);
    if (cur < prev * (1.0 - 1e-9)) {
      convex = false;
      break;
    }
    prev = cur;
  }
  Gf.strictly_convex = convex;
  return Gf;
}

// Largest constant for which the origin comparison s^2 + g^2 <= G^{-1}(s g)
// can hold with margin on (0, eps], shrunk by 5 percent.
inline double fit_cG(const DampingLaw& law) {
  if (law.kind == DampingKind::custom)
    throw std::invalid_argument("fit_cG: custom laws need an explicit c_G");
  const GFunction unit = make_G(law, 1.0);
  double c = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 400; ++i) {
    const double s = law.epsilon * std::pow(1e-8, 1.0 - i / 400.0);
    const double gs = law.g(s);
    const double denom = unit.G(s * s + gs * gs);
    if (denom > 0.0) c = std::min(c, s * gs / denom);
  }
  if (!std::isfinite(c) || c <= 0.0)
    throw std::runtime_error("fit_cG: could not fit a positive constant");
  return 0.95 * c;
}

inline GFunction make_G(const DampingLaw& law) {
  return make_G(law, law.kind == DampingKind::linear ? 0.5 : fit_cG(law));
}

inline GFunction make_custom_G(std::function<double(double)> G,
                               std::function<double(double)> dG, bool linear,
                               double s_max) {
  if (!G || !dG) throw std::invalid_argument("make_custom_G: missing evaluators");
  GFunction Gf;
  Gf.G = std::move(G);
  Gf.dG = std::move(dG);
  Gf.linear = linear;
  Gf.s_max = s_max;
  Gf.strictly_convex = !linear;
  Gf.slope_at_smax = Gf.dG(s_max);
  Gf.G_at_smax = Gf.G(s_max);
  return Gf;
}

inline double G_inverse(const GFunction& Gf, double y) {
  if (y < 0.0) throw std::domain_error("G_inverse: negative argument");
  if (y == 0.0) return 0.0;
  if (Gf.linear) return y / Gf.c_G;
  if (y >= Gf.G_at_smax)
    return Gf.s_max + (y - Gf.G_at_smax) / Gf.slope_at_smax;
  return solve_monotone([&](double x) { return Gf.G(x); }, 0.0, Gf.s_max, y);
}

// (G')^{-1} on the strictly convex branch, by bisection over [0, s_max].
inline double g_prime_inverse(const GFunction& Gf, double s) {
  if (Gf.linear)
    throw std::invalid_argument("g_prime_inverse: G is linear, G' not invertible");
  if (!Gf.strictly_convex)
    throw std::domain_error("g_prime_inverse: G is not convex on its domain");
  if (s < 0.0) throw std::domain_error("g_prime_inverse: negative argument");
  if (s == 0.0) return 0.0;
  const double hi = Gf.slope_at_smax;
  if (s > hi * (1.0 + 1e-12))
    throw std::domain_error("g_prime_inverse: argument outside the range of G'");
  return solve_monotone([&](double x) { return Gf.dG(x); }, 0.0, Gf.s_max,
                        std::min(s, hi));
}

// Legendre conjugate G*(s) = s t - G(t) at t = (G')^{-1}(s).
inline double legendre_conjugate(const GFunction& Gf, double s) {
  const double t = g_prime_inverse(Gf, s);
  return s * t - Gf.G(t);
}

// phi(t) = t               if G is linear on [0, eps]
//        = t G'(eps0 t)    otherwise, valid while eps0 t stays in G's domain.
inline double phi(const GFunction& Gf, double eps0, double t) {
  if (t < 0.0) throw std::domain_error("phi: negative argument");
  if (Gf.linear) return t;
  if (!(eps0 > 0.0)) throw std::invalid_argument("phi: eps0 must be positive");
  if (t == 0.0) return 0.0;  // G' may blow up at 0; the product still vanishes
  const double x = eps0 * t;
  if (x > Gf.s_max * (1.0 + 1e-12))
    throw std::domain_error("phi: eps0*t exceeds the comparison-function domain");
  return t * Gf.dG(std::min(x, Gf.s_max));
}

struct HypothesisCheck {
  std::string id;
  bool pass = false;
  double worst_margin = 0.0;  // negative means violated
  double location = 0.0;      // s at which the worst margin occurred
};

struct HypothesisReport {
  std::vector<HypothesisCheck> checks;
  bool all_pass = false;
};

// Samples the five structural conditions on log-spaced grids reaching 1e-12
// and reports the worst margin of each.  Conditions are checked independently
// against the claimed constants on the law; conflicts are reported, never
// patched up.
inline HypothesisReport check_hypotheses(const DampingLaw& law,
                                         const GFunction& Gf,
                                         int sample_count = 512) {
  if (sample_count < 100)
    throw std::invalid_argument("check_hypotheses: need at least 100 samples");

  const double s_hi = std::max(10.0 * law.epsilon, 10.0);
  std::vector<double> xs(sample_count);
  for (int i = 0; i < sample_count; ++i)
    xs[i] = s_hi * std::pow(1e-12 / s_hi, 1.0 - double(i) / (sample_count - 1));
  std::sort(xs.begin(), xs.end());

  auto eval = [&](double s) {
    const double v = law.g(s);
    if (!std::isfinite(v))
      throw std::runtime_error("check_hypotheses: g(" + std::to_string(s) +
                               ") is not finite");
    return v;
  };

  HypothesisReport rep;

  {  // (i) monotone non-decreasing across the origin
    HypothesisCheck c{"monotone", true, std::numeric_limits<double>::infinity(), 0.0};
    std::vector<double> grid;
    for (auto it = xs.rbegin(); it != xs.rend(); ++it) grid.push_back(-*it);
    grid.push_back(0.0);
    grid.insert(grid.end(), xs.begin(), xs.end());
    double scale = 0.0;
    for (double s : grid) scale = std::max(scale, std::fabs(eval(s)));
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
      const double d = eval(grid[i + 1]) - eval(grid[i]);
      if (d < c.worst_margin) {
        c.worst_margin = d;
        c.location = grid[i];
      }
    }
    c.pass = c.worst_margin >= -1e-12 * std::max(1.0, scale);
    rep.checks.push_back(c);
  }

  {  // (ii) linear growth outside [-eps, eps]: c1|s| <= |g(s)| <= c2|s|
    HypothesisCheck c{"linear_growth", true, std::numeric_limits<double>::infinity(), 0.0};
    for (double s : xs) {
      if (s <= law.epsilon) continue;
      const double gv = std::fabs(eval(s));
      const double lower = gv - law.c1 * s;
      const double upper = law.c2 * s - gv;
      const double m = std::min(lower, upper);
      if (m < c.worst_margin) {
        c.worst_margin = m;
        c.location = s;
      }
    }
    c.pass = c.worst_margin >= -1e-9 * std::max(1.0, std::fabs(c.worst_margin));
    rep.checks.push_back(c);
  }

  {  // (iii) origin comparison: s^2 + g^2 <= G^{-1}(s g) on (0, eps]
    HypothesisCheck c{"origin_comparison", true, std::numeric_limits<double>::infinity(), 0.0};
    for (double s : xs) {
      if (s > law.epsilon) continue;
      const double gv = eval(s);
      const double lhs = s * s + gv * gv;
      const double rhs = G_inverse(Gf, s * gv);
      const double m = rhs - lhs;
      // margins shrink quadratically toward 0; normalize before comparing
      const double mn = m / std::max(lhs, 1e-300);
      if (mn < c.worst_margin) {
        c.worst_margin = mn;
        c.location = s;
      }
    }
    c.pass = c.worst_margin >= -1e-9;
    rep.checks.push_back(c);
  }

  {  // (iv) derivative bounds: tau1 <= g'(s) <= tau2 everywhere
    HypothesisCheck c{"derivative_bounds", true, std::numeric_limits<double>::infinity(), 0.0};
    for (double s : xs) {
      const double d = law.dg(s);
      if (!std::isfinite(d))
        throw std::runtime_error("check_hypotheses: g' not finite at s=" +
                                 std::to_string(s));
      const double m = std::min(d - law.tau1, law.tau2 - d);
      if (m < c.worst_margin) {
        c.worst_margin = m;
        c.location = s;
      }
    }
    c.pass = c.worst_margin >=
             -1e-9 * std::max(1.0, std::max(std::fabs(law.tau1), std::fabs(law.tau2)));
    rep.checks.push_back(c);
  }

  {  // (v) convexity on [0, inf): chord slopes non-decreasing
    HypothesisCheck c{"convexity", true, std::numeric_limits<double>::infinity(), 0.0};
    std::vector<double> grid;
    grid.push_back(0.0);
    grid.insert(grid.end(), xs.begin(), xs.end());
    double prev_slope = -std::numeric_limits<double>::infinity();
    double max_slope = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
      const double slope =
          (eval(grid[i + 1]) - eval(grid[i])) / (grid[i + 1] - grid[i]);
      max_slope = std::max(max_slope, std::fabs(slope));
      if (i > 0) {
        const double m = slope - prev_slope;
        if (m < c.worst_margin) {
          c.worst_margin = m;
          c.location = grid[i];
        }
      }
      prev_slope = slope;
    }
    c.pass = c.worst_margin >= -1e-7 * std::max(1.0, max_slope);
    rep.checks.push_back(c);
  }

  rep.all_pass = true;
  for (const auto& c : rep.checks) rep.all_pass = rep.all_pass && c.pass;
  return rep;
}

}  // namespace petrowave
