#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "petrowave/energy.hpp"
#include "petrowave/galerkin.hpp"

using namespace petrowave;

namespace {

constexpr double kPi = std::numbers::pi;

SimConfig base_config(int modes, double coupling_value, double dt, double t_end) {
  SimConfig c;
  c.basis = make_basis(1.0, modes);
  c.coupling = make_constant_coupling(c.basis, coupling_value);
  c.initial = make_state(modes);
  c.dt = dt;
  c.t_end = t_end;
  return c;
}

}  // namespace

TEST_CASE("right side of the coupled system on first modes") {
  const ModeBasis b = make_basis(1.0, 4);
  const CouplingProfile a = make_constant_coupling(b, 0.7);
  SimState s = make_state(4);
  s.u2.coeffs[0] = 1.0;

  const StateDeriv d = rhs(s, a, nullptr, nullptr, b);
  // positions move with the velocities (zero here)
  REQUIRE(d.du1[0] == 0.0);
  REQUIRE(d.du2[0] == 0.0);
  // v2' = -lambda_1 u2; v1' picks up the projected coupling a * lap u2
  REQUIRE(std::fabs(d.dv2[0] + 9.8696044010893586188) <= 1e-12);
  REQUIRE(std::fabs(d.dv1[0] + 6.9087230807625510332) <= 1e-12);
  for (int k = 1; k < 4; ++k) {
    REQUIRE(std::fabs(d.dv1[k]) <= 1e-12);
    REQUIRE(std::fabs(d.dv2[k]) <= 1e-12);
  }
}

TEST_CASE("right side of the damping term") {
  const ModeBasis b = make_basis(1.0, 4);
  const CouplingProfile a0 = make_zero_coupling(b);
  const DampingLaw lin = make_linear();
  SimState s = make_state(4);
  s.v1.coeffs[0] = 1.0;

  const StateDeriv d = rhs(s, a0, &lin, nullptr, b);
  REQUIRE(d.du1[0] == 1.0);
  // projected g(lap v1) = -lambda_1 v1 for the identity law
  REQUIRE(std::fabs(d.dv1[0] + 9.8696044010893586188) <= 1e-12);
  // branch 2 untouched
  REQUIRE(d.dv2[0] == 0.0);
}

TEST_CASE("rk4 reproduces the plate and wave rotation frequencies") {
  // decoupled, undamped: u1 oscillates at lambda_1, u2 at sqrt(lambda_1)
  SimConfig c = base_config(4, 0.0, 1e-3, 0.1);
  c.initial.u1.coeffs[0] = 1.0;
  c.initial.u2.coeffs[0] = 1.0;
  const RunResult r = run(c);
  REQUIRE_FALSE(r.diverged);

  const double lam = c.basis.eigenvalues[0];
  const SimState& last = r.states.back();
  REQUIRE(std::fabs(last.u1.coeffs[0] - std::cos(lam * 0.1)) <= 1e-9);
  REQUIRE(std::fabs(last.v1.coeffs[0] + lam * std::sin(lam * 0.1)) <= 1e-8);
  REQUIRE(std::fabs(last.u2.coeffs[0] - std::cos(std::sqrt(lam) * 0.1)) <= 1e-10);
  REQUIRE(std::fabs(last.v2.coeffs[0] +
                    std::sqrt(lam) * std::sin(std::sqrt(lam) * 0.1)) <= 1e-10);
}

TEST_CASE("rk4 matches the overdamped closed form of the damped wave branch") {
  SimConfig c = base_config(4, 0.0, 2e-4, 1.0);
  c.g2 = make_linear();
  c.initial.u2.coeffs[0] = 1.0;
  const RunResult r = run(c);
  REQUIRE_FALSE(r.diverged);

  // u2'' = -lambda (u2 + u2'): roots of r^2 + lambda r + lambda = 0
  const double lam = c.basis.eigenvalues[0];
  const double disc = std::sqrt(lam * lam - 4.0 * lam);
  const double r1 = 0.5 * (-lam + disc);
  const double r2 = 0.5 * (-lam - disc);
  REQUIRE(std::fabs(r1 + 1.1291920842280785) <= 1e-12);
  REQUIRE(std::fabs(r2 + 8.7404123168612801) <= 1e-12);

  const double t = 1.0;
  const double u2 = (r2 * std::exp(r1 * t) - r1 * std::exp(r2 * t)) / (r2 - r1);
  const double v2 = r1 * r2 * (std::exp(r1 * t) - std::exp(r2 * t)) / (r2 - r1);
  const SimState& last = r.states.back();
  REQUIRE(std::fabs(last.u2.coeffs[0] - u2) <= 1e-9);
  REQUIRE(std::fabs(last.v2.coeffs[0] - v2) <= 1e-9);
  // the undriven branch stays identically zero
  REQUIRE(last.u1.coeffs[0] == 0.0);
  REQUIRE(last.v1.coeffs[0] == 0.0);
}

TEST_CASE("splitting is exact on the decoupled undamped system") {
  SimConfig c = base_config(4, 0.0, 2e-3, 1.0);
  c.integrator = Integrator::splitting;
  c.initial.u1.coeffs[0] = 1.0;
  c.initial.u2.coeffs[2] = -0.5;
  const RunResult r = run(c);

  const double lam1 = c.basis.eigenvalues[0];
  const double f2 = std::sqrt(c.basis.eigenvalues[2]);
  const SimState& last = r.states.back();
  REQUIRE(std::fabs(last.u1.coeffs[0] - std::cos(lam1)) <= 1e-12);
  REQUIRE(std::fabs(last.v1.coeffs[0] + lam1 * std::sin(lam1)) <= 1e-11);
  REQUIRE(std::fabs(last.u2.coeffs[2] + 0.5 * std::cos(f2)) <= 1e-12);
  REQUIRE(std::fabs(last.v2.coeffs[2] - 0.5 * f2 * std::sin(f2)) <= 1e-11);
}

TEST_CASE("splitting converges at second order to an rk4 reference") {
  auto make = [](double dt, Integrator integ) {
    SimConfig c = base_config(4, 0.3, dt, 0.5);
    c.integrator = integ;
    c.g1 = make_linear();
    c.g2 = make_linear();
    c.initial.u1.coeffs[0] = 1.0;
    c.initial.u2.coeffs[0] = 1.0;
    c.sample_stride = 1 << 20;  // endpoints only
    return c;
  };
  const RunResult ref = run(make(1e-4, Integrator::rk4));
  const RunResult coarse = run(make(2e-3, Integrator::splitting));
  const RunResult fine = run(make(1e-3, Integrator::splitting));

  auto err = [&](const RunResult& r) {
    double m = 0.0;
    const SimState& a = r.states.back();
    const SimState& b = ref.states.back();
    for (int k = 0; k < 4; ++k) {
      m = std::max(m, std::fabs(a.u1.coeffs[k] - b.u1.coeffs[k]));
      m = std::max(m, std::fabs(a.u2.coeffs[k] - b.u2.coeffs[k]));
      m = std::max(m, std::fabs(a.v1.coeffs[k] - b.v1.coeffs[k]));
      m = std::max(m, std::fabs(a.v2.coeffs[k] - b.v2.coeffs[k]));
    }
    return m;
  };
  const double e_coarse = err(coarse);
  const double e_fine = err(fine);
  REQUIRE(e_coarse > 1e-10);  // measurable, not roundoff
  const double ratio = e_coarse / e_fine;
  REQUIRE(ratio > 3.0);
  REQUIRE(ratio < 5.0);
}

TEST_CASE("damped runs dissipate energy") {
  SimConfig c = base_config(8, 0.3, 5e-4, 2.0);
  c.g1 = make_linear();
  c.g2 = make_linear();
  c.initial.u2.coeffs[0] = 1.0;
  c.sample_stride = 100;
  const RunResult r = run(c);
  REQUIRE_FALSE(r.diverged);
  const double e0 = r.trace.samples.front().E;
  for (const EnergySample& s : r.trace.samples) {
    REQUIRE(s.E <= e0 * (1.0 + 1e-9));
    REQUIRE(s.dissipation <= 1e-12);
  }
  REQUIRE(r.trace.samples.back().E < 0.1 * e0);
}

TEST_CASE("semi-discrete energy identity holds to the midpoint-rule defect") {
  // sample every step at dt, read the energy slope via centered differences
  // over 2 dt and compare with the dissipation at the midpoint sample
  SimConfig c = base_config(8, 0.3, 1e-3, 0.2);
  c.g1 = make_linear();
  c.g2 = make_linear();
  c.initial.u2.coeffs[0] = 1.0;
  const RunResult r = run(c);
  const auto& ss = r.trace.samples;
  REQUIRE(ss.size() == 201);

  const double e0 = std::fabs(ss.front().E);
  double worst = 0.0;
  for (std::size_t m = 0; m + 2 < ss.size(); m += 2) {
    const double slope = (ss[m + 2].E - ss[m].E) / (2e-3);
    worst = std::max(worst, std::fabs(slope - ss[m + 1].dissipation));
  }
  // the defect is the (2 dt)^2 E'''/24 midpoint error, far below this gate
  REQUIRE(worst <= 1e-3 * e0);
}

TEST_CASE("runs are deterministic") {
  SimConfig c = base_config(8, 0.3, 1e-3, 0.5);
  c.g1 = make_linear();
  c.initial.u1.coeffs[1] = 0.25;
  c.initial.u2.coeffs[0] = 1.0;
  const RunResult a = run(c);
  const RunResult b = run(c);
  REQUIRE(a.trace.fingerprint == b.trace.fingerprint);
  REQUIRE(a.trace.samples.size() == b.trace.samples.size());
}

TEST_CASE("strong coupling beyond the admissible range blows up and is flagged") {
  SimConfig c = base_config(4, 5.0, 0.01, 10.0);
  c.initial.u1.coeffs[0] = 0.1;
  c.initial.u2.coeffs[0] = 0.1;
  const RunResult r = run(c);
  REQUIRE(r.diverged);
  REQUIRE(r.diverged_t > 0.0);
  REQUIRE(r.diverged_t <= 10.0);
  REQUIRE(r.steps_taken < 1000);
  REQUIRE_FALSE(r.trace.samples.empty());
  REQUIRE_FALSE(r.trace.fingerprint.empty());
}

TEST_CASE("sampling bookkeeping: stride, forced final sample, time stamps") {
  // long domain: soft modes, so the guard admits a quarter-second step
  SimConfig c;
  c.basis = make_basis(2.0 * kPi, 2);
  c.coupling = make_zero_coupling(c.basis);
  c.initial = make_state(2);
  c.dt = 0.25;
  c.t_end = 1.0;
  c.initial.u1.coeffs[0] = 1e-3;
  c.sample_stride = 2;
  const RunResult r = run(c);
  REQUIRE(r.steps_taken == 4);
  REQUIRE(r.trace.samples.size() == 3);
  REQUIRE(r.trace.samples[0].t == 0.0);
  REQUIRE(r.trace.samples[1].t == 0.5);
  REQUIRE(r.trace.samples[2].t == 1.0);
  REQUIRE(r.states.size() == 3);

  c.keep_states = false;
  const RunResult r2 = run(c);
  REQUIRE(r2.states.empty());
  REQUIRE(r2.trace.samples.size() == 3);
}

TEST_CASE("configuration validation") {
  SimConfig c = base_config(4, 0.0, 1e-3, 1.0);

  SimConfig bad = c;
  bad.dt = 0.0;
  REQUIRE_THROWS_AS(validate(bad), std::invalid_argument);

  bad = c;
  bad.t_end = -1.0;
  REQUIRE_THROWS_AS(validate(bad), std::invalid_argument);

  bad = c;
  bad.sample_stride = 0;
  REQUIRE_THROWS_AS(validate(bad), std::invalid_argument);

  bad = c;
  bad.initial = make_state(5);
  REQUIRE_THROWS_AS(validate(bad), std::invalid_argument);

  bad = c;
  bad.coupling.grid_values.pop_back();
  REQUIRE_THROWS_AS(validate(bad), std::invalid_argument);

  bad = c;
  bad.dt = 0.1;  // far above the rk4 guard 2.5/lambda_4
  REQUIRE_THROWS_AS(validate(bad), std::invalid_argument);

  bad = c;
  bad.t_end = 1.0005;  // not a multiple of dt
  REQUIRE_THROWS_AS(validate(bad), std::invalid_argument);

  REQUIRE_NOTHROW(validate(c));
}

TEST_CASE("stability guards scale with the stiffest mode and the damping slope") {
  const ModeBasis b = make_basis(1.0, 16);
  // lambda_16 = 256 pi^2; 2.5/lambda_16 and 0.5/lambda_16
  REQUIRE(std::fabs(stability_limit(b, 1.0, Integrator::rk4) -
                    9.894646840072048e-4) <= 1e-12);
  REQUIRE(std::fabs(stability_limit(b, 1.0, Integrator::splitting) -
                    1.9789293680144097e-4) <= 1e-12);
  // a slope bound above 1 tightens the guard proportionally
  REQUIRE(std::fabs(stability_limit(b, 3.0, Integrator::rk4) -
                    9.894646840072048e-4 / 3.0) <= 1e-12);
  // slope bounds below 1 do not loosen it
  REQUIRE(stability_limit(b, 0.25, Integrator::rk4) ==
          stability_limit(b, 1.0, Integrator::rk4));

  const DampingLaw cubic = make_power_log(3.0, 0.0, 1.0);
  const DampingLaw lin = make_linear();
  REQUIRE(effective_tau2(nullptr, nullptr) == 1.0);
  REQUIRE(effective_tau2(&lin, nullptr) == 1.0);
  REQUIRE(std::fabs(effective_tau2(&lin, &cubic) - 3.0) <= 1e-12);
}

TEST_CASE("initial data projection") {
  const ModeBasis b = make_basis(1.0, 4);

  const SpectralField f =
      project_initial(b, [](double x) { return std::sin(2.0 * kPi * x); });
  REQUIRE(std::fabs(f.coeffs[0]) <= 1e-12);
  REQUIRE(std::fabs(f.coeffs[1] - 1.0) <= 1e-12);
  REQUIRE(std::fabs(f.coeffs[2]) <= 1e-12);

  const SpectralField padded = project_initial(b, std::vector<double>{0.5});
  REQUIRE(padded.size() == 4);
  REQUIRE(padded.coeffs[0] == 0.5);
  REQUIRE(padded.coeffs[3] == 0.0);

  REQUIRE_THROWS_AS(project_initial(b, std::vector<double>(5, 1.0)),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(
      project_initial(b, std::vector<double>{
                             std::numeric_limits<double>::quiet_NaN()}),
      std::invalid_argument);
  REQUIRE_THROWS_AS(project_initial(b,
                                    [](double) {
                                      return std::numeric_limits<double>::infinity();
                                    }),
                    std::invalid_argument);
}
