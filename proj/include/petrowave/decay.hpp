#pragma once

// Decay envelopes for the damped system.  Given the comparison function phi
// and a rate constant omega, the predicted bound is
//
//   E(t) <= psi_inv(h(t) + psi(E(0))),   psi(t) = \int_t^1 ds / (omega phi(s)),
//
// where h vanishes on the initial plateau [0, E0/(omega phi(E0))] and grows
// like t - t_plateau after it (the comparison ODE S' = -omega phi(S) started
// from E0 at the plateau end).  The lambda-weighted generalization replaces
// the plateau length by T0 = log(1 + lambda t_plateau)/lambda and carries the
// weight e^{lambda(t-h)} through an auxiliary primitive d.
//
// Energies are normalized by max(E0, 1) before the machinery is applied and
// the envelope is rescaled by the same factor, so psi's integral-to-1
// definition is always meaningful.
//
// All inversions run by bisection on verified-monotone cached tables; the
// evaluators after construction are pure and safe to share across threads.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "petrowave/damping.hpp"
#include "petrowave/quadrature.hpp"

namespace petrowave {

// Requested (p, q) pair lies outside the catalogued asymptotic branches.
class UnsupportedBranchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class RateBranch { exponential, poly_log, stretched_exp, double_exp };

inline const char* rate_branch_name(RateBranch b) {
  switch (b) {
    case RateBranch::exponential: return "exponential";
    case RateBranch::poly_log: return "poly_log";
    case RateBranch::stretched_exp: return "stretched_exp";
    case RateBranch::double_exp: return "double_exp";
  }
  return "unknown";
}

struct RateDescriptor {
  RateBranch branch = RateBranch::exponential;
  double exponent1 = 0.0;  // power of t (poly_log) or stretch exponent
  double exponent2 = 0.0;  // power of ln t (poly_log only)
  std::string formula;     // canonical text rendering of the terminal rate
  bool ambiguous = false;  // set where the source family's case labels and
                           // branch formulas disagree (p > 1 with q <= 1)
};

namespace detail {
inline std::string format_exp(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}
}  // namespace detail

// Terminal decay rate of the power-log damping family as a closed form.
//   p = 1, q = 0        -> exponential          c*e^(-omega*t)
//   p > 1               -> t^{-2/(p-1)} (ln t)^{-2q/(p-1)}
//   p = 1, q < 1, q != 0 -> stretched exponential  exp(-t^{1/(1-q)})
//   p = 1, q = 1        -> double exponential      exp(-e^t)
//   p = 1, q > 1        -> not covered (UnsupportedBranchError)
inline RateDescriptor asymptotic_rate(double p, double q) {
  if (!(p >= 1.0) || !std::isfinite(p) || !std::isfinite(q))
    throw std::invalid_argument("asymptotic_rate: require finite p >= 1");
  RateDescriptor r;
  if (p > 1.0) {
    r.branch = RateBranch::poly_log;
    r.exponent1 = 2.0 / (p - 1.0);
    r.exponent2 = 2.0 * q / (p - 1.0);
    r.formula = "c*t^(-" + detail::format_exp(r.exponent1) + ")";
    if (r.exponent2 != 0.0)
      r.formula += "*(ln t)^(-" + detail::format_exp(r.exponent2) + ")";
    // The family's printed case label gates this branch on q > 1 even though
    // the formula depends only on p; outside q > 1 we still report the
    // formula but flag the discrepancy.
    r.ambiguous = (q <= 1.0);
    return r;
  }
  if (q == 0.0) {
    r.branch = RateBranch::exponential;
    r.formula = "c*e^(-omega*t)";
    return r;
  }
  if (q < 1.0) {
    r.branch = RateBranch::stretched_exp;
    r.exponent1 = 1.0 / (1.0 - q);
    r.formula = "c*e^(-t^(" + detail::format_exp(r.exponent1) + "))";
    return r;
  }
  if (q == 1.0) {
    r.branch = RateBranch::double_exp;
    r.formula = "c*e^(-e^(t))";
    return r;
  }
  throw UnsupportedBranchError(
      "asymptotic_rate: p = 1 with q > 1 has no catalogued decay branch");
}

class DecayEnvelope {
 public:
  // phi_fn must be positive on (0, 1]; omega > 0; E0 > 0; lambda >= 0.
  DecayEnvelope(std::function<double(double)> phi_fn, double omega, double E0,
                double lambda = 0.0, double eps0 = 0.0)
      : phi_(std::move(phi_fn)),
        omega_(omega),
        lambda_(lambda),
        eps0_(eps0),
        E0_(E0) {
    if (!phi_) throw std::invalid_argument("envelope: phi evaluator required");
    if (!(omega_ > 0.0) || !std::isfinite(omega_))
      throw std::invalid_argument("envelope: omega must be positive");
    if (!(E0_ > 0.0) || !std::isfinite(E0_))
      throw std::invalid_argument("envelope: E0 must be positive");
    if (lambda_ < 0.0 || !std::isfinite(lambda_))
      throw std::invalid_argument("envelope: lambda must be nonnegative");
    scale_ = std::max(E0_, 1.0);
    e0n_ = E0_ / scale_;
    const double phi_e0 = phi_(e0n_);
    if (!(phi_e0 > 0.0) || !std::isfinite(phi_e0))
      throw std::invalid_argument("envelope: phi(E0) must be positive");
    t_plateau_ = e0n_ / (omega_ * phi_e0);
    t0_ = lambda_ > 0.0 ? std::log1p(lambda_ * t_plateau_) / lambda_
                        : t_plateau_;
    build_psi_table();
    psi_e0_ = psi(e0n_);
    if (lambda_ > 0.0) build_d_table();
  }

  double omega() const { return omega_; }
  double lambda() const { return lambda_; }
  double eps0() const { return eps0_; }
  double initial_energy() const { return E0_; }
  double scale() const { return scale_; }
  double normalized_e0() const { return e0n_; }
  double plateau_end() const { return t_plateau_; }
  double weighted_plateau_end() const { return t0_; }

  // psi(t) = \int_t^1 ds/(omega phi(s)), adaptive per cached segment.
  double psi(double t) const {
    if (!(t > 0.0) || t > 1.0)
      throw std::invalid_argument("psi: argument must lie in (0, 1]");
    if (t == 1.0) return 0.0;
    if (t < psi_knots_.back())
      throw std::domain_error("psi: argument below the resolvable range");
    auto it = std::lower_bound(psi_knots_.begin(), psi_knots_.end(), t,
                               std::greater<double>());
    const std::size_t i = static_cast<std::size_t>(it - psi_knots_.begin());
    if (i == 0) return 0.0;  // t == 1 handled above; guard exact hit
    return psi_cum_[i - 1] +
           integrate_adaptive([this](double s) { return psi_integrand(s); }, t,
                              psi_knots_[i - 1], 1e-11, 0.0);
  }

  // Inverse of psi by bisection within the bracketing cached segment.  Values
  // beyond the cached range clamp to the deepest knot, which overestimates
  // the true inverse and therefore keeps the envelope an upper bound.
  double psi_inv(double y) const {
    if (y < 0.0 || !std::isfinite(y))
      throw std::invalid_argument("psi_inv: argument must be nonnegative");
    if (y == 0.0) return 1.0;
    if (y >= psi_cum_.back()) return psi_knots_.back();
    auto it = std::lower_bound(psi_cum_.begin(), psi_cum_.end(), y);
    const std::size_t i = static_cast<std::size_t>(it - psi_cum_.begin());
    if (i == 0) return 1.0;
    return solve_monotone([this](double x) { return psi(x); }, psi_knots_[i],
                          psi_knots_[i - 1], y);
  }

  // Plateau construction: 0 until t_plateau, then the root of the increasing
  // map h -> h + t_plateau at level t.
  double h_of_t(double t) const {
    if (t < 0.0) throw std::invalid_argument("h: time must be nonnegative");
    if (t <= t_plateau_) return 0.0;
    return solve_monotone([this](double h) { return h + t_plateau_; }, 0.0, t,
                          t);
  }

  // The envelope psi_inv(h(t) + psi(E0)), rescaled to the original energy.
  double value(double t) const {
    return scale_ * psi_inv(h_of_t(t) + psi_e0_);
  }

  // Lambda-weighted bound e^{tau0 lambda} d^{-1}(e^{lambda(t-h)} omega
  // phi(psi_inv(h + psi(E0)))).  At lambda = 0, d is omega*phi itself and the
  // expression collapses to value(), recomputed here through an independent
  // inversion path.
  double lemma0_bound(double t) const {
    if (t < 0.0)
      throw std::invalid_argument("lemma0: time must be nonnegative");
    double h = 0.0, weight = 1.0;
    if (lambda_ == 0.0) {
      h = h_of_t(t);
    } else {
      if (t > t0_)
        h = solve_monotone(
            [this](double x) {
              return big_d(x) + t_plateau_ * std::exp(lambda_ * x);
            },
            0.0, t, big_d(t));
      weight = std::exp(lambda_ * (t - h));
    }
    const double level = psi_inv(h + psi_e0_);
    const double arg = weight * omega_ * phi_(level);
    // tau0 is the plateau length on the plateau and 0 after it; the
    // discontinuity at t0 is inherited from the piecewise definition.
    const double tau0 = (lambda_ > 0.0 && t <= t0_) ? t0_ : 0.0;
    return std::exp(tau0 * lambda_) * d_inv(arg) * scale_;
  }

 private:
  double psi_integrand(double s) const { return 1.0 / (omega_ * phi_(s)); }

  void build_psi_table() {
    const double ratio = std::pow(10.0, -1.0 / 16.0);  // 16 knots per decade
    psi_knots_ = {1.0};
    psi_cum_ = {0.0};
    double hi = 1.0;
    while (hi > 1e-300 && psi_cum_.back() < 1e9) {
      const double lo = hi * ratio;
      double seg;
      try {
        seg = integrate_adaptive(
            [this](double s) { return psi_integrand(s); }, lo, hi, 1e-11, 0.0);
      } catch (...) {
        break;
      }
      if (!std::isfinite(seg) || seg <= 0.0) break;
      psi_knots_.push_back(lo);
      psi_cum_.push_back(psi_cum_.back() + seg);
      hi = lo;
    }
    if (psi_knots_.size() < 2)
      throw std::invalid_argument(
          "envelope: phi is not positive and integrable near 1");
  }

  double big_d(double t) const { return std::expm1(lambda_ * t) / lambda_; }

  // d(y) = \int_0^y omega phi(s)/s ds for lambda > 0, cached on a geometric
  // grid; the tail below the deepest knot is dropped (it is smaller than any
  // queried tolerance by construction).
  void build_d_table() {
    double y_hi = 10.0 * (1.0 + lambda_ * t_plateau_) * e0n_;
    while (y_hi > e0n_) {
      try {
        phi_(y_hi);
        break;
      } catch (...) {
        y_hi *= 0.5;
      }
    }
    const double ratio = std::pow(10.0, -1.0 / 16.0);
    std::vector<double> desc_knots = {y_hi};
    std::vector<double> seg(1, 0.0);
    double hi = y_hi;
    for (int i = 0; i < 60 * 16 && hi > 1e-300; ++i) {
      const double lo = hi * ratio;
      double s;
      try {
        s = integrate_adaptive([this](double u) { return d_integrand(u); }, lo,
                               hi, 1e-10, 0.0);
      } catch (...) {
        break;
      }
      if (!std::isfinite(s) || s <= 0.0) break;
      desc_knots.push_back(lo);
      seg.push_back(s);
      hi = lo;
    }
    if (desc_knots.size() < 2)
      throw std::runtime_error(
          "lemma0: d is not invertible on the required range");
    d_knots_.assign(desc_knots.rbegin(), desc_knots.rend());
    d_cum_.assign(d_knots_.size(), 0.0);
    for (std::size_t i = 1; i < d_knots_.size(); ++i)
      d_cum_[i] = d_cum_[i - 1] + seg[seg.size() - i];
    // Extend upward until the largest bound argument (attained at t = T0) is
    // covered, stopping where phi's domain ends.
    const double need =
        1.5 * (1.0 + lambda_ * t_plateau_) * omega_ * phi_(e0n_);
    const double up = std::pow(10.0, 1.0 / 16.0);
    for (int i = 0; i < 2000 && d_cum_.back() < need; ++i) {
      const double next = d_knots_.back() * up;
      double s;
      try {
        s = integrate_adaptive([this](double u) { return d_integrand(u); },
                               d_knots_.back(), next, 1e-10, 0.0);
      } catch (...) {
        break;
      }
      if (!std::isfinite(s) || s <= 0.0) break;
      d_knots_.push_back(next);
      d_cum_.push_back(d_cum_.back() + s);
    }
  }

  double d_integrand(double s) const { return omega_ * phi_(s) / s; }

  double d_at(double y) const {
    auto it = std::lower_bound(d_knots_.begin(), d_knots_.end(), y);
    std::size_t i = static_cast<std::size_t>(it - d_knots_.begin());
    if (i == 0) return 0.0;
    return d_cum_[i - 1] +
           integrate_adaptive([this](double u) { return d_integrand(u); },
                              d_knots_[i - 1], y, 1e-10, 0.0);
  }

  double d_inv(double arg) const {
    if (lambda_ == 0.0) {
      // d = omega*phi directly; invert on (0, 1] where the bound lives.
      return solve_monotone(
          [this](double s) { return s == 0.0 ? 0.0 : omega_ * phi_(s); }, 0.0,
          1.0, arg);
    }
    if (arg <= d_cum_.front()) return d_knots_.front();  // floor clamp
    if (arg > d_cum_.back())
      throw std::runtime_error(
          "lemma0: d is not invertible on the required range");
    auto it = std::lower_bound(d_cum_.begin(), d_cum_.end(), arg);
    const std::size_t i = static_cast<std::size_t>(it - d_cum_.begin());
    return solve_monotone([this](double y) { return d_at(y); }, d_knots_[i - 1],
                          d_knots_[i], arg);
  }

  std::function<double(double)> phi_;
  double omega_, lambda_, eps0_, E0_;
  double scale_ = 1.0, e0n_ = 1.0, t_plateau_ = 0.0, t0_ = 0.0, psi_e0_ = 0.0;
  std::vector<double> psi_knots_, psi_cum_;  // descending t / ascending psi
  std::vector<double> d_knots_, d_cum_;      // ascending y / ascending d
};

// Envelope driven by the comparison function of a concrete damping law.
inline DecayEnvelope make_envelope(const GFunction& Gf, double eps0,
                                   double omega, double E0,
                                   double lambda = 0.0) {
  return DecayEnvelope([Gf, eps0](double t) { return phi(Gf, eps0, t); },
                       omega, E0, lambda, eps0);
}

// Operation-style wrappers.
inline double psi(const DecayEnvelope& env, double t) { return env.psi(t); }
inline double psi_inv(const DecayEnvelope& env, double y) {
  return env.psi_inv(y);
}
inline double h_of_t(const DecayEnvelope& env, double t) {
  return env.h_of_t(t);
}
inline double envelope(const DecayEnvelope& env, double t) {
  return env.value(t);
}
inline double lemma0_bound(const DecayEnvelope& env, double t) {
  return env.lemma0_bound(t);
}

}  // namespace petrowave
