#pragma once

// Simulation state and coupling-coefficient profiles.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "petrowave/spectral.hpp"

namespace petrowave {

// The coupling coefficient a(x), stored as grid samples on the quadrature
// grid of a basis.  sup_norm is the grid supremum used by the admissibility
// test sup|a| < min(1/c', 1).
struct CouplingProfile {
  std::vector<double> grid_values;
  double sup_norm = 0.0;
  bool is_zero = true;
};

inline CouplingProfile make_coupling(const ModeBasis& basis,
                                     const std::function<double(double)>& a) {
  CouplingProfile c;
  c.grid_values.resize(basis.grid_size);
  for (int j = 0; j < basis.grid_size; ++j) {
    const double v = a(basis.grid_points[j]);
    if (!std::isfinite(v))
      throw std::invalid_argument("make_coupling: non-finite coupling value");
    c.grid_values[j] = v;
    c.sup_norm = std::max(c.sup_norm, std::fabs(v));
  }
  c.is_zero = (c.sup_norm == 0.0);
  return c;
}

inline CouplingProfile make_constant_coupling(const ModeBasis& basis,
                                              double value) {
  return make_coupling(basis, [value](double) { return value; });
}

inline CouplingProfile make_zero_coupling(const ModeBasis& basis) {
  return make_constant_coupling(basis, 0.0);
}

// Piecewise-linear profile through (x_i, value_i); x must be strictly
// increasing and cover [0, L].
inline CouplingProfile make_table_coupling(const ModeBasis& basis,
                                           const std::vector<double>& xs,
                                           const std::vector<double>& values) {
  if (xs.size() != values.size() || xs.size() < 2)
    throw std::invalid_argument("make_table_coupling: need matching x/value "
                                "lists with at least two entries");
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (!(xs[i] > xs[i - 1]))
      throw std::invalid_argument("make_table_coupling: x must be increasing");
  if (xs.front() > 0.0 || xs.back() < basis.length)
    throw std::invalid_argument("make_table_coupling: table must cover [0, L]");
  return make_coupling(basis, [&xs, &values](double x) {
    std::size_t hi = 1;
    while (hi + 1 < xs.size() && xs[hi] < x) ++hi;
    const double w = (x - xs[hi - 1]) / (xs[hi] - xs[hi - 1]);
    return values[hi - 1] + w * (values[hi] - values[hi - 1]);
  });
}

// sup|a| must stay below min(1/c', 1) for the energy to be coercive.
inline double admissibility_threshold(const ModeBasis& basis) {
  return std::min(1.0 / embedding_constants(basis).c_prime, 1.0);
}

// Positions and velocities of both unknowns in coefficient space.
struct SimState {
  double t = 0.0;
  SpectralField u1, u2, v1, v2;
};

inline SimState make_state(int mode_count, double t = 0.0) {
  SimState s;
  s.t = t;
  s.u1.coeffs.assign(mode_count, 0.0);
  s.u2.coeffs.assign(mode_count, 0.0);
  s.v1.coeffs.assign(mode_count, 0.0);
  s.v2.coeffs.assign(mode_count, 0.0);
  return s;
}

inline void check_state(const SimState& s, int mode_count) {
  if (s.u1.size() != mode_count || s.u2.size() != mode_count ||
      s.v1.size() != mode_count || s.v2.size() != mode_count)
    throw std::invalid_argument("state/basis mode counts disagree");
}

}  // namespace petrowave
