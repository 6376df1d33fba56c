#pragma once

// Projected dynamics of the coupled plate/wave system in the sine basis:
//
//   v1'_k = -lambda_k^2 u1_k + P_k[a * lap u2] + P_k[g1(lap v1)]
//   v2'_k = -lambda_k  u2_k + P_k[a * lap u1] + P_k[g2(lap v2)]
//   u_i' = v_i
//
// where lap acts spectrally, pointwise products and damping evaluation happen
// on the oversampled grid, and P_k is the discrete sine analysis.  Two
// integrators: classical rk4 on the full right side (reference), and Strang
// splitting whose linear substep rotates each mode exactly (frequency
// lambda_k for u1, sqrt(lambda_k) for u2) around an explicit-midpoint step of
// the coupling + damping part.

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "petrowave/damping.hpp"
#include "petrowave/energy.hpp"
#include "petrowave/spectral.hpp"
#include "petrowave/state.hpp"

namespace petrowave {

enum class Integrator { rk4, splitting };

struct StateDeriv {
  std::vector<double> du1, du2, dv1, dv2;
  void resize(int n) {
    du1.assign(n, 0.0);
    du2.assign(n, 0.0);
    dv1.assign(n, 0.0);
    dv2.assign(n, 0.0);
  }
};

struct SimConfig {
  ModeBasis basis;
  CouplingProfile coupling;
  std::optional<DampingLaw> g1, g2;
  SimState initial;
  double dt = 0.0;
  double t_end = 0.0;
  Integrator integrator = Integrator::rk4;
  int sample_stride = 1;
  bool keep_states = true;
};

// Largest claimed slope of the damping laws, defaulting to 1 when no damping
// is present so the guards below stay meaningful.
inline double effective_tau2(const DampingLaw* g1, const DampingLaw* g2) {
  double tau = 0.0;
  if (g1) tau = std::max(tau, g1->tau2);
  if (g2) tau = std::max(tau, g2->tau2);
  return tau > 0.0 ? tau : 1.0;
}

// Step-size guards: rk4 must resolve the stiffest plate rotation (angular
// frequency lambda_N) and the damping stiffness; the splitting integrator is
// limited only by its explicit-midpoint substep.
inline double stability_limit(const ModeBasis& basis, double tau2,
                              Integrator integrator) {
  const double lam_n = basis.eigenvalues.back();
  if (integrator == Integrator::rk4)
    return 2.5 / (lam_n * std::max(1.0, tau2));
  return 0.5 / (lam_n * std::max(1.0, tau2));
}

inline void validate(const SimConfig& c) {
  if (!(c.dt > 0.0)) throw std::invalid_argument("config: dt must be positive");
  if (c.t_end < 0.0)
    throw std::invalid_argument("config: t_end must be nonnegative");
  if (c.sample_stride < 1)
    throw std::invalid_argument("config: sample_stride must be >= 1");
  check_state(c.initial, c.basis.mode_count);
  if (static_cast<int>(c.coupling.grid_values.size()) != c.basis.grid_size)
    throw std::invalid_argument("config: coupling grid does not match basis");
  const double limit = stability_limit(
      c.basis, effective_tau2(c.g1 ? &*c.g1 : nullptr, c.g2 ? &*c.g2 : nullptr),
      c.integrator);
  if (c.dt > limit * (1.0 + 1e-12))
    throw std::invalid_argument(
        "config: dt exceeds the stability guard " + std::to_string(limit) +
        " for this basis and damping");
  const double steps = c.t_end / c.dt;
  if (std::fabs(steps - std::llround(steps)) > 1e-6)
    throw std::invalid_argument("config: t_end must be a multiple of dt");
}

// Projection of a profile onto the first N modes via grid sampling + analysis.
inline SpectralField project_initial(const ModeBasis& basis,
                                     const std::function<double(double)>& f) {
  GridField g;
  g.values.resize(basis.grid_size);
  for (int j = 0; j < basis.grid_size; ++j) {
    g.values[j] = f(basis.grid_points[j]);
    if (!std::isfinite(g.values[j]))
      throw std::invalid_argument("project_initial: profile is not finite");
  }
  return analyze(basis, g);
}

// Mode-coefficient lists pass through unchanged (padded with zeros).
inline SpectralField project_initial(const ModeBasis& basis,
                                     const std::vector<double>& coeffs) {
  if (static_cast<int>(coeffs.size()) > basis.mode_count)
    throw std::invalid_argument(
        "project_initial: more coefficients than basis modes");
  SpectralField f;
  f.coeffs = coeffs;
  f.coeffs.resize(basis.mode_count, 0.0);
  for (double c : f.coeffs)
    if (!std::isfinite(c))
      throw std::invalid_argument("project_initial: non-finite coefficient");
  return f;
}

// Evaluates the right side; reusable across steps to avoid allocation churn.
class Stepper {
 public:
  Stepper(const ModeBasis& basis, const CouplingProfile& coupling,
          const DampingLaw* g1, const DampingLaw* g2)
      : b_(basis), a_(coupling), g1_(g1), g2_(g2) {
    const int n = b_.mode_count;
    scratch_coeffs_.assign(n, 0.0);
    proj_.assign(n, 0.0);
    for (auto* d : {&k1_, &k2_, &k3_, &k4_}) d->resize(n);
    mid_ = make_state(n);
  }

  void rhs(const SimState& s, StateDeriv& out) {
    const int n = b_.mode_count;
    out.du1 = s.v1.coeffs;
    out.du2 = s.v2.coeffs;
    for (int k = 0; k < n; ++k) {
      const double lam = b_.eigenvalues[k];
      out.dv1[k] = -lam * lam * s.u1.coeffs[k];
      out.dv2[k] = -lam * s.u2.coeffs[k];
    }
    if (!a_.is_zero) {
      laplacian_grid(s.u2.coeffs, grid1_);
      for (int j = 0; j < b_.grid_size; ++j) grid1_[j] *= a_.grid_values[j];
      analyze_into(b_, grid1_, proj_);
      for (int k = 0; k < n; ++k) out.dv1[k] += proj_[k];

      laplacian_grid(s.u1.coeffs, grid1_);
      for (int j = 0; j < b_.grid_size; ++j) grid1_[j] *= a_.grid_values[j];
      analyze_into(b_, grid1_, proj_);
      for (int k = 0; k < n; ++k) out.dv2[k] += proj_[k];
    }
    if (g1_) {
      laplacian_grid(s.v1.coeffs, grid1_);
      for (int j = 0; j < b_.grid_size; ++j) grid1_[j] = g1_->g(grid1_[j]);
      analyze_into(b_, grid1_, proj_);
      for (int k = 0; k < n; ++k) out.dv1[k] += proj_[k];
    }
    if (g2_) {
      laplacian_grid(s.v2.coeffs, grid1_);
      for (int j = 0; j < b_.grid_size; ++j) grid1_[j] = g2_->g(grid1_[j]);
      analyze_into(b_, grid1_, proj_);
      for (int k = 0; k < n; ++k) out.dv2[k] += proj_[k];
    }
  }

  void step_rk4(SimState& s, double dt) {
    rhs(s, k1_);
    blend(s, 0.5 * dt, k1_, mid_);
    rhs(mid_, k2_);
    blend(s, 0.5 * dt, k2_, mid_);
    rhs(mid_, k3_);
    blend(s, dt, k3_, mid_);
    rhs(mid_, k4_);
    const int n = b_.mode_count;
    const double w = dt / 6.0;
    for (int k = 0; k < n; ++k) {
      s.u1.coeffs[k] += w * (k1_.du1[k] + 2 * k2_.du1[k] + 2 * k3_.du1[k] + k4_.du1[k]);
      s.u2.coeffs[k] += w * (k1_.du2[k] + 2 * k2_.du2[k] + 2 * k3_.du2[k] + k4_.du2[k]);
      s.v1.coeffs[k] += w * (k1_.dv1[k] + 2 * k2_.dv1[k] + 2 * k3_.dv1[k] + k4_.dv1[k]);
      s.v2.coeffs[k] += w * (k1_.dv2[k] + 2 * k2_.dv2[k] + 2 * k3_.dv2[k] + k4_.dv2[k]);
    }
    s.t += dt;
  }

  // Strang: exact linear half-rotation, explicit midpoint on coupling+damping,
  // second half-rotation.
  void step_splitting(SimState& s, double dt) {
    prepare_rotation(dt);
    rotate_half(s);
    nonlinear_midpoint(s, dt);
    rotate_half(s);
    s.t += dt;
  }

 private:
  void laplacian_grid(const std::vector<double>& coeffs,
                      std::vector<double>& grid) {
    const int n = b_.mode_count;
    for (int k = 0; k < n; ++k)
      scratch_coeffs_[k] = -b_.eigenvalues[k] * coeffs[k];
    synthesize_into(b_, scratch_coeffs_, grid);
  }

  static void axpy(const std::vector<double>& x, double a,
                   const std::vector<double>& y, std::vector<double>& out) {
    const std::size_t n = x.size();
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + a * y[i];
  }

  void blend(const SimState& s, double a, const StateDeriv& d, SimState& out) {
    axpy(s.u1.coeffs, a, d.du1, out.u1.coeffs);
    axpy(s.u2.coeffs, a, d.du2, out.u2.coeffs);
    axpy(s.v1.coeffs, a, d.dv1, out.v1.coeffs);
    axpy(s.v2.coeffs, a, d.dv2, out.v2.coeffs);
    out.t = s.t;
  }

  void prepare_rotation(double dt) {
    if (dt == rot_dt_) return;
    rot_dt_ = dt;
    const int n = b_.mode_count;
    rot_.assign(static_cast<std::size_t>(n) * 4, 0.0);
    for (int k = 0; k < n; ++k) {
      const double f1 = b_.eigenvalues[k];             // u1 frequency
      const double f2 = std::sqrt(b_.eigenvalues[k]);  // u2 frequency
      rot_[4 * k + 0] = std::cos(f1 * 0.5 * dt);
      rot_[4 * k + 1] = std::sin(f1 * 0.5 * dt);
      rot_[4 * k + 2] = std::cos(f2 * 0.5 * dt);
      rot_[4 * k + 3] = std::sin(f2 * 0.5 * dt);
    }
  }

  void rotate_half(SimState& s) {
    const int n = b_.mode_count;
    for (int k = 0; k < n; ++k) {
      const double f1 = b_.eigenvalues[k];
      const double f2 = std::sqrt(b_.eigenvalues[k]);
      const double c1 = rot_[4 * k], s1 = rot_[4 * k + 1];
      const double c2 = rot_[4 * k + 2], s2 = rot_[4 * k + 3];
      const double u1 = s.u1.coeffs[k], v1 = s.v1.coeffs[k];
      const double u2 = s.u2.coeffs[k], v2 = s.v2.coeffs[k];
      s.u1.coeffs[k] = c1 * u1 + (s1 / f1) * v1;
      s.v1.coeffs[k] = -f1 * s1 * u1 + c1 * v1;
      s.u2.coeffs[k] = c2 * u2 + (s2 / f2) * v2;
      s.v2.coeffs[k] = -f2 * s2 * u2 + c2 * v2;
    }
  }

  // u is frozen here, so the coupling projection is a constant source and
  // only v moves: v' = source + P[g(lap v)] integrated by explicit midpoint.
  void nonlinear_midpoint(SimState& s, double dt) {
    const int n = b_.mode_count;
    src1_.assign(n, 0.0);
    src2_.assign(n, 0.0);
    if (!a_.is_zero) {
      laplacian_grid(s.u2.coeffs, grid1_);
      for (int j = 0; j < b_.grid_size; ++j) grid1_[j] *= a_.grid_values[j];
      analyze_into(b_, grid1_, src1_);
      laplacian_grid(s.u1.coeffs, grid1_);
      for (int j = 0; j < b_.grid_size; ++j) grid1_[j] *= a_.grid_values[j];
      analyze_into(b_, grid1_, src2_);
    }
    auto damping_term = [this](const DampingLaw* g,
                               const std::vector<double>& v,
                               std::vector<double>& out) {
      if (!g) {
        out.assign(b_.mode_count, 0.0);
        return;
      }
      laplacian_grid(v, grid1_);
      for (int j = 0; j < b_.grid_size; ++j) grid1_[j] = g->g(grid1_[j]);
      analyze_into(b_, grid1_, out);
    };
    // half step to the midpoint
    damping_term(g1_, s.v1.coeffs, proj_);
    axpy(s.v1.coeffs, 0.5 * dt, proj_, mid_.v1.coeffs);
    for (int k = 0; k < n; ++k) mid_.v1.coeffs[k] += 0.5 * dt * src1_[k];
    damping_term(g2_, s.v2.coeffs, proj_);
    axpy(s.v2.coeffs, 0.5 * dt, proj_, mid_.v2.coeffs);
    for (int k = 0; k < n; ++k) mid_.v2.coeffs[k] += 0.5 * dt * src2_[k];
    // full step with the midpoint slope
    damping_term(g1_, mid_.v1.coeffs, proj_);
    for (int k = 0; k < n; ++k) s.v1.coeffs[k] += dt * (src1_[k] + proj_[k]);
    damping_term(g2_, mid_.v2.coeffs, proj_);
    for (int k = 0; k < n; ++k) s.v2.coeffs[k] += dt * (src2_[k] + proj_[k]);
  }

  const ModeBasis& b_;
  const CouplingProfile& a_;
  const DampingLaw* g1_;
  const DampingLaw* g2_;
  std::vector<double> scratch_coeffs_, proj_, grid1_, src1_, src2_, rot_;
  StateDeriv k1_, k2_, k3_, k4_;
  SimState mid_;
  double rot_dt_ = -1.0;
};

// One-off conveniences (tests and small probes).
inline StateDeriv rhs(const SimState& s, const CouplingProfile& a,
                      const DampingLaw* g1, const DampingLaw* g2,
                      const ModeBasis& b) {
  Stepper st(b, a, g1, g2);
  StateDeriv d;
  d.resize(b.mode_count);
  st.rhs(s, d);
  return d;
}

inline SimState step(const SimState& s, double dt, const CouplingProfile& a,
                     const DampingLaw* g1, const DampingLaw* g2,
                     const ModeBasis& b,
                     Integrator integrator = Integrator::rk4) {
  Stepper st(b, a, g1, g2);
  SimState out = s;
  if (integrator == Integrator::rk4)
    st.step_rk4(out, dt);
  else
    st.step_splitting(out, dt);
  return out;
}

struct RunResult {
  std::vector<SimState> states;  // sampled states (empty if keep_states off)
  EnergyTrace trace;
  bool diverged = false;
  double diverged_t = 0.0;
  long long steps_taken = 0;
};

inline bool state_out_of_range(const SimState& s) {
  for (const auto* f : {&s.u1, &s.u2, &s.v1, &s.v2})
    for (double c : f->coeffs)
      if (!std::isfinite(c) || std::fabs(c) > 1e12) return true;
  return false;
}

// Integrates to t_end, sampling every sample_stride steps plus the final
// state.  On blow-up the partial trace is returned with the divergence flag
// and time stamp set.
inline RunResult run(const SimConfig& cfg) {
  validate(cfg);
  const DampingLaw* g1 = cfg.g1 ? &*cfg.g1 : nullptr;
  const DampingLaw* g2 = cfg.g2 ? &*cfg.g2 : nullptr;
  Stepper stepper(cfg.basis, cfg.coupling, g1, g2);

  RunResult out;
  SimState s = cfg.initial;
  s.t = 0.0;
  const long long n_steps = std::llround(cfg.t_end / cfg.dt);
  auto sample = [&](const SimState& state) {
    if (cfg.keep_states) out.states.push_back(state);
    out.trace.samples.push_back(
        energy_sample(state, cfg.coupling, cfg.basis, g1, g2));
  };
  for (long long i = 0; i < n_steps; ++i) {
    s.t = i * cfg.dt;
    if (i % cfg.sample_stride == 0) sample(s);
    if (cfg.integrator == Integrator::rk4)
      stepper.step_rk4(s, cfg.dt);
    else
      stepper.step_splitting(s, cfg.dt);
    out.steps_taken = i + 1;
    if (state_out_of_range(s)) {
      out.diverged = true;
      out.diverged_t = (i + 1) * cfg.dt;
      break;
    }
  }
  if (!out.diverged) s.t = n_steps * cfg.dt;
  sample(s);
  out.trace.fingerprint = fingerprint_trace(out.trace);
  return out;
}

}  // namespace petrowave
