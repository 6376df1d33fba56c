#pragma once

// Sine eigenbasis of -d2/dx2 on the interval (0, L) with hinged ends:
// w_k(x) = sin(k pi x / L), lambda_k = (k pi / L)^2.  Fields live either as
// mode coefficients or as values on a uniform interior grid x_j = j L/(M+1).
// With M >= 2N the discrete sine transform below is an exact inverse pair,
// and the grid quadrature integrates products of two basis functions exactly,
// which is what makes the energy identities in energy.hpp hold to roundoff.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace petrowave {

// Field as coefficients in the sine basis (index k-1 holds mode k).
struct SpectralField {
  std::vector<double> coeffs;
  int size() const { return static_cast<int>(coeffs.size()); }
};

// Field as point values on the interior quadrature grid.
struct GridField {
  std::vector<double> values;
  int size() const { return static_cast<int>(values.size()); }
};

struct ModeBasis {
  double length = 1.0;
  int mode_count = 0;  // N
  int grid_size = 0;   // M = oversample * N
  std::vector<double> eigenvalues;  // lambda_k, strictly increasing
  std::vector<double> grid_points;  // x_j, j = 1..M
  std::vector<double> sine;         // sine[k*M + j] = w_{k+1}(x_{j+1})

  double grid_weight() const { return length / (grid_size + 1); }
};

// Builds the basis together with the exact sine table.  Arguments k*j*pi/(M+1)
// are reduced modulo 2(M+1) into the first quadrant before calling sin so the
// table stays accurate for large k*j.
inline ModeBasis make_basis(double length, int mode_count, int oversample = 4) {
  if (!(length > 0.0))
    throw std::invalid_argument("make_basis: domain length must be positive");
  if (mode_count < 1)
    throw std::invalid_argument("make_basis: mode count must be >= 1");
  if (oversample < 4)
    throw std::invalid_argument("make_basis: oversample must be >= 4");

  ModeBasis b;
  b.length = length;
  b.mode_count = mode_count;
  b.grid_size = oversample * mode_count;

  const double pi = std::numbers::pi;
  b.eigenvalues.resize(mode_count);
  for (int k = 1; k <= mode_count; ++k) {
    const double kf = k * pi / length;
    b.eigenvalues[k - 1] = kf * kf;
  }

  const int M = b.grid_size;
  b.grid_points.resize(M);
  for (int j = 1; j <= M; ++j) b.grid_points[j - 1] = j * length / (M + 1);

  b.sine.resize(static_cast<std::size_t>(mode_count) * M);
  const long long period = 2LL * (M + 1);
  for (int k = 1; k <= mode_count; ++k) {
    for (int j = 1; j <= M; ++j) {
      long long r = (static_cast<long long>(k) * j) % period;
      double sign = 1.0;
      if (r >= M + 1) {
        sign = -1.0;
        r -= M + 1;
      }
      if (2 * r > M + 1) r = (M + 1) - r;  // reflect into [0, (M+1)/2]
      b.sine[static_cast<std::size_t>(k - 1) * M + (j - 1)] =
          sign * std::sin(r * pi / (M + 1));
    }
  }
  return b;
}

// Allocation-free transform cores; the integrator hot loop reuses buffers.
inline void synthesize_into(const ModeBasis& b,
                            const std::vector<double>& coeffs,
                            std::vector<double>& values) {
  if (static_cast<int>(coeffs.size()) != b.mode_count)
    throw std::invalid_argument("synthesize: coefficient count != mode count");
  const int M = b.grid_size;
  values.assign(M, 0.0);
  for (int k = 0; k < b.mode_count; ++k) {
    const double c = coeffs[k];
    if (c == 0.0) continue;
    const double* row = &b.sine[static_cast<std::size_t>(k) * M];
    for (int j = 0; j < M; ++j) values[j] += c * row[j];
  }
}

inline void analyze_into(const ModeBasis& b, const std::vector<double>& values,
                         std::vector<double>& coeffs) {
  if (static_cast<int>(values.size()) != b.grid_size)
    throw std::invalid_argument("analyze: value count != grid size");
  const int M = b.grid_size;
  coeffs.assign(b.mode_count, 0.0);
  const double scale = 2.0 / (M + 1);
  for (int k = 0; k < b.mode_count; ++k) {
    const double* row = &b.sine[static_cast<std::size_t>(k) * M];
    double acc = 0.0;
    for (int j = 0; j < M; ++j) acc += row[j] * values[j];
    coeffs[k] = scale * acc;
  }
}

inline GridField synthesize(const ModeBasis& b, const SpectralField& f) {
  GridField g;
  synthesize_into(b, f.coeffs, g.values);
  return g;
}

// Discrete sine analysis; exact inverse of synthesize for band-limited data
// because sum_j sin(k j pi/(M+1)) sin(l j pi/(M+1)) = (M+1)/2 delta_kl for
// k, l <= M.
inline SpectralField analyze(const ModeBasis& b, const GridField& g) {
  SpectralField f;
  analyze_into(b, g.values, f.coeffs);
  return f;
}

// (-Delta)^power acting mode-wise; power 1 or 2 (Laplacian / bi-Laplacian
// magnitude -- callers track the sign of Delta themselves).
inline SpectralField apply_spectral_power(const ModeBasis& b,
                                          const SpectralField& f, int power) {
  if (power != 1 && power != 2)
    throw std::invalid_argument("apply_spectral_power: power must be 1 or 2");
  if (f.size() != b.mode_count)
    throw std::invalid_argument("apply_spectral_power: size mismatch");
  SpectralField out = f;
  for (int k = 0; k < b.mode_count; ++k) {
    const double lam = b.eigenvalues[k];
    out.coeffs[k] *= (power == 1) ? lam : lam * lam;
  }
  return out;
}

// The Laplacian itself (sign included): mode k maps to -lambda_k c_k.
inline SpectralField apply_laplacian(const ModeBasis& b,
                                     const SpectralField& f) {
  if (f.size() != b.mode_count)
    throw std::invalid_argument("apply_laplacian: size mismatch");
  SpectralField out = f;
  for (int k = 0; k < b.mode_count; ++k) out.coeffs[k] *= -b.eigenvalues[k];
  return out;
}

// Squared seminorm sum_k lambda_k^order c_k^2 (L/2):
//   order 0: ||f||^2, 1: ||grad f||^2, 2: ||Delta f||^2, 3: ||grad Delta f||^2.
inline double sobolev_seminorm_sq(const ModeBasis& b, const SpectralField& f,
                                  int order) {
  if (order < 0 || order > 3)
    throw std::invalid_argument("sobolev_seminorm_sq: order must be in 0..3");
  if (f.size() != b.mode_count)
    throw std::invalid_argument("sobolev_seminorm_sq: size mismatch");
  double acc = 0.0;
  for (int k = 0; k < b.mode_count; ++k) {
    double w = 1.0;
    for (int r = 0; r < order; ++r) w *= b.eigenvalues[k];
    acc += w * f.coeffs[k] * f.coeffs[k];
  }
  return acc * (0.5 * b.length);
}

// Sharp Poincare-type constants on the interval: ||grad v|| <= c ||Delta v||
// and ||Delta u|| <= c' ||grad Delta u||, both equal to 1/sqrt(lambda_1) = L/pi,
// attained on the first mode.
struct EmbeddingConstants {
  double c;
  double c_prime;
};

inline EmbeddingConstants embedding_constants(const ModeBasis& b) {
  const double v = 1.0 / std::sqrt(b.eigenvalues[0]);
  return {v, v};
}

// Grid quadrature (L/(M+1)) sum_j f(x_j); exact for products of two modes.
inline double integrate_grid(const ModeBasis& b, const GridField& g) {
  if (g.size() != b.grid_size)
    throw std::invalid_argument("integrate_grid: value count != grid size");
  double acc = 0.0;
  for (double v : g.values) acc += v;
  return acc * b.grid_weight();
}

}  // namespace petrowave
