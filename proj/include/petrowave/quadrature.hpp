#pragma once

// Adaptive Gauss-Kronrod quadrature and bisection root bracketing.  The
// integrands fed in here (reciprocals of convex comparison functions) are
// smooth and positive on the closed segments supplied, merely steep near the
// lower endpoint; subdivision with a per-interval error budget handles that.
// Genuinely singular integrands exhaust the depth cap and fail loudly rather
// than returning a silent misestimate.

#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <utility>

namespace petrowave {

namespace detail {

// 15-point Kronrod nodes on [0,1] half-interval (symmetric), with Kronrod
// weights and the embedded 7-point Gauss weights on the odd-index nodes.
inline constexpr double kGkNode[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

inline constexpr double kGkWeight[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

inline constexpr double kGaussWeight[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

}  // namespace detail

// One 7-15 panel over [a,b]; returns the Kronrod estimate and writes the
// usual |K15-G7| based error bound.  When requested, also reports the
// integral of |f| over the panel, the natural roundoff scale.
template <class F>
double gauss_kronrod_panel(F&& f, double a, double b, double& err,
                           double* resabs_out = nullptr) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);

  double fv[15];
  for (int i = 0; i < 7; ++i) {
    fv[i] = f(mid - half * detail::kGkNode[i]);
    fv[14 - i] = f(mid + half * detail::kGkNode[i]);
  }
  fv[7] = f(mid);

  double resk = 0.0;
  for (int i = 0; i < 7; ++i)
    resk += detail::kGkWeight[i] * (fv[i] + fv[14 - i]);
  resk += detail::kGkWeight[7] * fv[7];

  double resg = 0.0;
  for (int i = 0; i < 3; ++i)
    resg += detail::kGaussWeight[i] * (fv[2 * i + 1] + fv[13 - 2 * i]);
  resg += detail::kGaussWeight[3] * fv[7];

  // mean deviation of f over the panel; scaling |K15-G7| against it keeps the
  // estimate conservative on steep panels where the raw difference can
  // accidentally cancel
  const double mean = 0.5 * resk;
  double resasc = detail::kGkWeight[7] * std::fabs(fv[7] - mean);
  for (int i = 0; i < 7; ++i)
    resasc += detail::kGkWeight[i] *
              (std::fabs(fv[i] - mean) + std::fabs(fv[14 - i] - mean));
  resasc *= std::fabs(half);

  if (resabs_out) {
    double resabs = detail::kGkWeight[7] * std::fabs(fv[7]);
    for (int i = 0; i < 7; ++i)
      resabs +=
          detail::kGkWeight[i] * (std::fabs(fv[i]) + std::fabs(fv[14 - i]));
    *resabs_out = resabs * std::fabs(half);
  }

  const double kronrod = resk * half;
  double abserr = std::fabs((resk - resg) * half);
  if (resasc != 0.0 && abserr != 0.0)
    abserr = resasc * std::min(1.0, std::pow(200.0 * abserr / resasc, 1.5));
  // never report zero error for a nonzero estimate; keeps the driver honest
  if (abserr == 0.0 && kronrod != 0.0)
    abserr = std::fabs(kronrod) * std::numeric_limits<double>::epsilon() * 50.0;
  err = abserr;
  return kronrod;
}

// Adaptive driver: recursive interval splitting with a per-interval error
// budget proportional to its length.  Throws if the budget cannot be met.
template <class F>
double integrate_adaptive(F&& f, double a, double b, double rel_tol = 1e-12,
                          double abs_tol = 0.0) {
  if (!(a <= b)) throw std::invalid_argument("integrate_adaptive: a > b");
  if (a == b) return 0.0;

  double err0 = 0.0;
  const double coarse = gauss_kronrod_panel(f, a, b, err0);
  const double target =
      std::max(abs_tol, rel_tol * std::max(std::fabs(coarse), 1e-300));
  if (err0 <= target) return coarse;

  struct Frame {
    double a, b, budget;
    int depth;
  };
  // explicit stack; depth cap makes non-integrable singularities fail loudly
  Frame stack[2048];
  int top = 0;
  stack[top++] = {a, b, target, 0};
  double total = 0.0;

  while (top > 0) {
    const Frame fr = stack[--top];
    double err = 0.0, resabs = 0.0;
    const double est = gauss_kronrod_panel(f, fr.a, fr.b, err, &resabs);
    const double width = fr.b - fr.a;
    // once the estimate reaches the roundoff scale of the panel, splitting
    // further cannot improve it; halved budgets would otherwise demand
    // sub-roundoff accuracy on integrands with a large dynamic range
    const double floor =
        50.0 * std::numeric_limits<double>::epsilon() * resabs;
    if (err <= std::max(fr.budget, floor) || fr.depth >= 60 ||
        width <= std::fabs(fr.a) * 4.0 * std::numeric_limits<double>::epsilon()) {
      // an integrable endpoint singularity leaves a depth-capped sliver whose
      // residual is negligible against the global budget; a non-integrable
      // one leaves a sliver that still carries macroscopic error
      if (fr.depth >= 60 && err > 0.5 * target && err > floor)
        throw std::runtime_error(
            "integrate_adaptive: failed to converge (singular integrand?)");
      total += est;
      continue;
    }
    if (top + 2 > 2048)
      throw std::runtime_error("integrate_adaptive: subdivision overflow");
    const double m = 0.5 * (fr.a + fr.b);
    stack[top++] = {fr.a, m, 0.5 * fr.budget, fr.depth + 1};
    stack[top++] = {m, fr.b, 0.5 * fr.budget, fr.depth + 1};
  }
  return total;
}

// Bisection solve of f(x) = target on [lo, hi] for monotone continuous f.
// Direction is inferred from the endpoint values; no derivatives involved.
template <class F>
double solve_monotone(F&& f, double lo, double hi, double target,
                      double x_rel_tol = 1e-15) {
  if (!(lo < hi)) throw std::invalid_argument("solve_monotone: empty bracket");
  double flo = f(lo), fhi = f(hi);
  const bool increasing = flo <= fhi;
  auto below = [&](double fv) { return increasing ? fv < target : fv > target; };
  auto near = [&](double fv) {
    return std::fabs(fv - target) <=
           1e-9 * (std::fabs(fv) + std::fabs(target) + 1e-300);
  };

  // targets sitting on (or a hair beyond) an endpoint resolve to that
  // endpoint exactly; anything farther outside the bracket is a caller error
  if (!below(flo)) {
    if (near(flo)) return lo;
    throw std::domain_error("solve_monotone: target outside bracket");
  }
  if (fhi == target) return hi;
  if (below(fhi)) {
    if (near(fhi)) return hi;
    throw std::domain_error("solve_monotone: target outside bracket");
  }

  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // interval collapsed to adjacent doubles
    if (below(f(mid)))
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= x_rel_tol * std::max({std::fabs(lo), std::fabs(hi), 1e-30}))
      break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace petrowave
