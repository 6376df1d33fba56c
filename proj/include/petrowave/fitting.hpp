#pragma once

// Rate estimation from sampled energy traces and dominance checking against
// a decay envelope.  All fits are least squares in log space: the predicted
// bounds are multiplicative, so log residuals weight every decade evenly.

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "petrowave/decay.hpp"
#include "petrowave/energy.hpp"

namespace petrowave {

enum class FitModel { exponential, power, power_log };

struct FitWindow {
  double t_min = 0.0;
  double t_max = 0.0;
};

struct FitResult {
  FitModel model = FitModel::exponential;
  double C = 0.0;             // multiplicative constant
  double rate = 0.0;          // decay rate omega (exponential model)
  double exponent = 0.0;      // power of t (power / power_log models)
  double log_exponent = 0.0;  // power of ln t (power_log model)
  double residual = 0.0;      // RMS of the fit residual in log space
  FitWindow window;
  int sample_count = 0;
  bool poor_fit = false;  // residual above the reporting threshold (0.05)
};

namespace detail {

constexpr double kPoorFitResidual = 0.05;

struct LogSamples {
  std::vector<double> t, log_e;
};

inline LogSamples collect_window(const EnergyTrace& trace,
                                 const FitWindow& w) {
  LogSamples out;
  for (const auto& s : trace.samples) {
    if (s.t < w.t_min || s.t > w.t_max) continue;
    if (!(s.E > 0.0))
      throw std::invalid_argument("fit: nonpositive energy in fit window");
    out.t.push_back(s.t);
    out.log_e.push_back(std::log(s.E));
  }
  if (out.t.size() < 10)
    throw std::invalid_argument("fit: too few samples in window (need >= 10)");
  return out;
}

// Mean-centered least squares slope/intercept of y against x.
inline void least_squares(const std::vector<double>& x,
                          const std::vector<double>& y, double& slope,
                          double& intercept) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0))
    throw std::invalid_argument("fit: degenerate window (no time spread)");
  slope = sxy / sxx;
  intercept = my - slope * mx;
}

inline double rms(const std::vector<double>& r) {
  double s = 0.0;
  for (double v : r) s += v * v;
  return std::sqrt(s / static_cast<double>(r.size()));
}

}  // namespace detail

// Default late-time window: the last half of the trace; log-abscissa fits
// additionally start no earlier than t = e so that ln t > 1.
inline FitWindow late_window(const EnergyTrace& trace, bool log_fit) {
  if (trace.samples.empty())
    throw std::invalid_argument("late_window: empty trace");
  const double t_last = trace.samples.back().t;
  FitWindow w;
  w.t_min = 0.5 * t_last;
  if (log_fit) w.t_min = std::max(w.t_min, std::exp(1.0));
  w.t_max = t_last;
  return w;
}

// Least squares of ln E against t; the model is E = C e^{-omega t}.
inline FitResult fit_exponential(const EnergyTrace& trace,
                                 const FitWindow& window) {
  auto data = detail::collect_window(trace, window);
  double slope, intercept;
  detail::least_squares(data.t, data.log_e, slope, intercept);
  FitResult r;
  r.model = FitModel::exponential;
  r.rate = -slope;
  r.C = std::exp(intercept);
  std::vector<double> resid(data.t.size());
  for (std::size_t i = 0; i < data.t.size(); ++i)
    resid[i] = data.log_e[i] - (intercept + slope * data.t[i]);
  r.residual = detail::rms(resid);
  r.window = window;
  r.sample_count = static_cast<int>(data.t.size());
  r.poor_fit = r.residual > detail::kPoorFitResidual;
  return r;
}

// Fixes the exponents to the terminal branch of (p, q) and fits only the
// constant: E = C t^{-2/(p-1)} (ln t)^{-2q/(p-1)}.  Requires the window to
// start at t >= e so the log-log abscissa is well defined.
inline FitResult fit_power_log(const EnergyTrace& trace,
                               const FitWindow& window, double p, double q) {
  if (!(p > 1.0))
    throw std::invalid_argument("fit_power_log: requires p > 1");
  if (window.t_min < std::exp(1.0) * (1.0 - 1e-12))
    throw std::invalid_argument("fit_power_log: window must start at t >= e");
  auto data = detail::collect_window(trace, window);
  const double e1 = 2.0 / (p - 1.0);
  const double e2 = 2.0 * q / (p - 1.0);
  // ln E + e1 ln t + e2 ln ln t = ln C
  std::vector<double> shifted(data.t.size());
  for (std::size_t i = 0; i < data.t.size(); ++i)
    shifted[i] = data.log_e[i] + e1 * std::log(data.t[i]) +
                 e2 * std::log(std::log(data.t[i]));
  double mean = 0.0;
  for (double v : shifted) mean += v;
  mean /= static_cast<double>(shifted.size());
  FitResult r;
  r.model = FitModel::power_log;
  r.C = std::exp(mean);
  r.exponent = e1;
  r.log_exponent = e2;
  std::vector<double> resid(shifted.size());
  for (std::size_t i = 0; i < shifted.size(); ++i) resid[i] = shifted[i] - mean;
  r.residual = detail::rms(resid);
  r.window = window;
  r.sample_count = static_cast<int>(shifted.size());
  r.poor_fit = r.residual > detail::kPoorFitResidual;
  return r;
}

// Least squares slope of ln E against ln t over the window (the local
// log-log slope; negative for decaying traces).
inline double log_log_slope(const EnergyTrace& trace, const FitWindow& window) {
  auto data = detail::collect_window(trace, window);
  std::vector<double> log_t(data.t.size());
  for (std::size_t i = 0; i < data.t.size(); ++i) {
    if (!(data.t[i] > 0.0))
      throw std::invalid_argument("log_log_slope: window must have t > 0");
    log_t[i] = std::log(data.t[i]);
  }
  double slope, intercept;
  detail::least_squares(log_t, data.log_e, slope, intercept);
  return slope;
}

struct DominanceReport {
  bool holds = true;
  double worst_ratio = 0.0;    // max over samples of E / (C * envelope)
  double max_violation = 0.0;  // max(0, worst_ratio - 1)
  std::optional<double> first_violation_t;
  int sample_count = 0;
};

// Checks E(t_i) <= C * envelope(t_i) * (1 + 1e-6) over the window.
inline DominanceReport dominance_check(const EnergyTrace& trace,
                                       const DecayEnvelope& env, double C,
                                       const FitWindow& window) {
  if (!(C > 0.0)) throw std::invalid_argument("dominance: C must be positive");
  DominanceReport rep;
  for (const auto& s : trace.samples) {
    if (s.t < window.t_min || s.t > window.t_max) continue;
    ++rep.sample_count;
    const double bound = C * env.value(s.t);
    const double ratio = s.E / bound;
    rep.worst_ratio = std::max(rep.worst_ratio, ratio);
    if (s.E > bound * (1.0 + 1e-6)) {
      rep.holds = false;
      if (!rep.first_violation_t) rep.first_violation_t = s.t;
    }
  }
  rep.max_violation = std::max(0.0, rep.worst_ratio - 1.0);
  return rep;
}

// Whole-trace overload.
inline DominanceReport dominance_check(const EnergyTrace& trace,
                                       const DecayEnvelope& env, double C) {
  if (trace.samples.empty())
    throw std::invalid_argument("dominance: empty trace");
  FitWindow w{trace.samples.front().t, trace.samples.back().t};
  return dominance_check(trace, env, C, w);
}

}  // namespace petrowave
