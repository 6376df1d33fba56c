#pragma once

// Energy functional, dissipation rate, coercive lower bound, and coupling
// admissibility.
//
//   E(t) = 1/2 ( |grad v1|^2 + |grad v2|^2 + |grad lap u1|^2 + |lap u2|^2 )
//          + integral a(x) (lap u1)(lap u2) dx
//
//   dE/dt = - integral lap(v1) g1(lap v1) + lap(v2) g2(lap v2) dx
//
// The quadratic terms are evaluated by Parseval; the coupling integral and
// the dissipation by quadrature on the oversampled grid, which makes the
// semi-discrete energy identity hold exactly along the projected dynamics.

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "petrowave/damping.hpp"
#include "petrowave/spectral.hpp"
#include "petrowave/state.hpp"
#include "petrowave/util.hpp"

namespace petrowave {

struct EnergySample {
  double t = 0.0;
  double E = 0.0;
  double dissipation = 0.0;  // dE/dt; nonpositive for monotone odd g
  double lower_bound = 0.0;  // coercive bound; nonnegative when a admissible
  double kin1 = 0.0, kin2 = 0.0;  // 1/2 |grad v_i|^2
  double pot1 = 0.0, pot2 = 0.0;  // 1/2 |grad lap u1|^2, 1/2 |lap u2|^2
  double coupling = 0.0;          // integral a (lap u1)(lap u2)
};

struct EnergyTrace {
  std::vector<EnergySample> samples;
  std::string fingerprint;  // content hash, stable across reruns
};

namespace detail {
inline GridField laplacian_on_grid(const ModeBasis& b, const SpectralField& f) {
  return synthesize(b, apply_laplacian(b, f));
}
}  // namespace detail

// Coupling integral by grid quadrature of a * (lap u1) * (lap u2).
inline double coupling_integral(const SimState& s, const CouplingProfile& a,
                                const ModeBasis& b) {
  if (a.is_zero) return 0.0;
  const GridField l1 = detail::laplacian_on_grid(b, s.u1);
  const GridField l2 = detail::laplacian_on_grid(b, s.u2);
  double acc = 0.0;
  for (int j = 0; j < b.grid_size; ++j)
    acc += a.grid_values[j] * l1.values[j] * l2.values[j];
  return acc * b.grid_weight();
}

// dE/dt (nonpositive for monotone odd damping); laws may be absent.
inline double dissipation(const SimState& s, const DampingLaw* g1,
                          const DampingLaw* g2, const ModeBasis& b) {
  double acc = 0.0;
  if (g1) {
    const GridField lv = detail::laplacian_on_grid(b, s.v1);
    for (int j = 0; j < b.grid_size; ++j)
      acc += lv.values[j] * g1->g(lv.values[j]);
  }
  if (g2) {
    const GridField lv = detail::laplacian_on_grid(b, s.v2);
    for (int j = 0; j < b.grid_size; ++j)
      acc += lv.values[j] * g2->g(lv.values[j]);
  }
  return -acc * b.grid_weight();
}

struct Admissibility {
  bool admissible = false;
  double margin = 0.0;  // min(1/c', 1) - sup|a|
};

inline Admissibility coupling_admissible(const CouplingProfile& a,
                                         const ModeBasis& b) {
  Admissibility r;
  r.margin = admissibility_threshold(b) - a.sup_norm;
  r.admissible = r.margin > 0.0;
  return r;
}

struct CoerciveBound {
  double value = 0.0;
  bool energy_dominates = false;  // E >= value
};

// Full sample; pass nullptr for absent damping laws.
inline EnergySample energy_sample(const SimState& s, const CouplingProfile& a,
                                  const ModeBasis& b,
                                  const DampingLaw* g1 = nullptr,
                                  const DampingLaw* g2 = nullptr) {
  EnergySample out;
  out.t = s.t;
  out.kin1 = 0.5 * sobolev_seminorm_sq(b, s.v1, 1);
  out.kin2 = 0.5 * sobolev_seminorm_sq(b, s.v2, 1);
  out.pot1 = 0.5 * sobolev_seminorm_sq(b, s.u1, 3);
  out.pot2 = 0.5 * sobolev_seminorm_sq(b, s.u2, 2);
  out.coupling = coupling_integral(s, a, b);
  out.E = out.kin1 + out.kin2 + out.pot1 + out.pot2 + out.coupling;
  out.dissipation = dissipation(s, g1, g2, b);
  const double shrink = 1.0 - embedding_constants(b).c_prime * a.sup_norm;
  out.lower_bound = out.kin1 + out.kin2 + shrink * (out.pot1 + out.pot2);
  return out;
}

inline CoerciveBound coercive_lower_bound(const SimState& s,
                                          const CouplingProfile& a,
                                          const ModeBasis& b) {
  const EnergySample e = energy_sample(s, a, b);
  CoerciveBound r;
  r.value = e.lower_bound;
  r.energy_dominates = e.E >= r.value;
  return r;
}

// Bit-level content hash of a trace (time, energy, and component columns).
inline std::string fingerprint_trace(const EnergyTrace& trace) {
  std::uint64_t h = 14695981039346656037ull;
  auto mix = [&h](double v) {
    unsigned char raw[sizeof(double)];
    std::memcpy(raw, &v, sizeof(double));
    for (unsigned char byte : raw) {
      h ^= byte;
      h *= 1099511628211ull;
    }
  };
  for (const EnergySample& s : trace.samples) {
    mix(s.t);
    mix(s.E);
    mix(s.dissipation);
    mix(s.lower_bound);
    mix(s.kin1);
    mix(s.kin2);
    mix(s.pot1);
    mix(s.pot2);
    mix(s.coupling);
  }
  return hex64(h);
}

}  // namespace petrowave
