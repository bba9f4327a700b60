#include <doctest.h>

#include <cmath>

#include "qraman/constants.hpp"
#include "qraman/evolve.hpp"
#include "qraman/pulse.hpp"

using namespace qraman;

namespace {

HamFn zero_ham(int dim) {
  return [dim](double, CMat& h) { h = CMat(dim); };
}

// resonant drive (Omega(t)/2) sigma_x with a Gaussian envelope
HamFn resonant_drive(PulseSpec p) {
  return [p](double t, CMat& h) {
    h = CMat(2);
    const double half = 0.5 * envelope(p, t);
    h(0, 1) = half;
    h(1, 0) = half;
  };
}

}  // namespace

TEST_CASE("pure relaxation decays exponentially") {
  // d rho_h2/dt = -gamma2 rho_h2 under the relaxation dissipator alone
  const double gamma2 = 1.0 / 159.0;
  CMat a2(2);
  a2(0, 1) = 1.0;
  const DissipatorSpec diss[] = {{a2, gamma2}};
  DensityMatrix rho0 = basis_state(2, 1);
  IntegratorConfig cfg;
  cfg.max_step = 0.5;
  cfg.sample_times = {0.0, 50.0, 159.0, 400.0};
  const SimResult r = evolve(zero_ham(2), 2, diss, rho0, 0.0, 400.0, cfg);
  for (size_t i = 0; i < r.times.size(); ++i) {
    const double expect = std::exp(-gamma2 * r.times[i]);
    CHECK(std::abs(r.populations[1][i] - expect) / expect <= 1e-6);
  }
  CHECK(r.final_trace_defect <= 1e-9);
}

TEST_CASE("resonant Rabi rotation lands on sin^2(Theta/2)") {
  for (double frac : {0.5, 1.0, 2.2}) {
    PulseSpec p{0.0, 8.49, frac * kPi, 0.0, PulseRole::pump};
    const double sig = sigma_from_fwhm(p.fwhm);
    DensityMatrix rho0 = basis_state(2, 0);
    IntegratorConfig cfg;
    const SimResult r = evolve(resonant_drive(p), 2, {}, rho0, -8.0 * sig,
                               8.0 * sig, cfg);
    const double expect = std::pow(std::sin(0.5 * frac * kPi), 2);
    CHECK(std::abs(r.populations[1].back() - expect) <= 1e-6);
    CHECK(r.min_purity >= 1.0 - 1e-7);
  }
}

TEST_CASE("coherence decays at (gamma1 + gamma2)/2") {
  const double g1 = 1.0 / 263.0, g2 = 1.0 / 159.0;
  CMat a1(2), a2(2);
  a1(1, 1) = 1.0;
  a2(0, 1) = 1.0;
  const DissipatorSpec diss[] = {{a1, g1}, {a2, g2}};
  DensityMatrix rho0{CMat(2), 1e-9};
  rho0.matrix(0, 0) = 0.5;
  rho0.matrix(1, 1) = 0.5;
  rho0.matrix(0, 1) = 0.5;
  rho0.matrix(1, 0) = 0.5;
  IntegratorConfig cfg;
  cfg.max_step = 0.5;
  cfg.sample_times = {100.0, 200.0};
  const SimResult r = evolve(zero_ham(2), 2, diss, rho0, 0.0, 200.0, cfg, 0, 1);
  const double rate = 0.5 * (g1 + g2);
  CHECK(1.0 / rate == doctest::Approx(198.2).epsilon(2e-3));
  for (size_t i = 0; i < r.times.size(); ++i) {
    const double expect = 0.5 * std::exp(-rate * r.times[i]);
    CHECK(std::abs(std::abs(r.coherence_h1h2[i]) - expect) / expect <= 0.01);
  }
}

TEST_CASE("dense output tracks an analytic coherence rotation") {
  // H = (omega/2) sigma_z: rho_01(t) = rho_01(0) e^{+i omega t}
  const double omega = 3.7;
  HamFn ham = [omega](double, CMat& h) {
    h = CMat(2);
    h(0, 0) = 0.5 * omega;
    h(1, 1) = -0.5 * omega;
  };
  DensityMatrix rho0{CMat(2), 1e-9};
  rho0.matrix(0, 0) = 0.5;
  rho0.matrix(1, 1) = 0.5;
  rho0.matrix(0, 1) = 0.5;
  rho0.matrix(1, 0) = 0.5;
  IntegratorConfig cfg;
  cfg.sample_times = {0.333, 1.4142, 2.71828, 5.0};
  const SimResult r = evolve(ham, 2, {}, rho0, 0.0, 5.0, cfg, 0, 1);
  for (size_t i = 0; i < r.times.size(); ++i) {
    const cplx expect = 0.5 * std::polar(1.0, -omega * r.times[i]);
    CHECK(std::abs(r.coherence_h1h2[i] - expect) <= 1e-7);
  }
}

TEST_CASE("step halving changes the result within tolerance scale") {
  PulseSpec p{0.0, 8.49, 1.3 * kPi, 0.0, PulseRole::pump};
  const double sig = sigma_from_fwhm(p.fwhm);
  DensityMatrix rho0 = basis_state(2, 0);
  IntegratorConfig cfg;
  const SimResult a = evolve(resonant_drive(p), 2, {}, rho0, -6 * sig, 6 * sig, cfg);
  cfg.max_step *= 0.5;
  const SimResult b = evolve(resonant_drive(p), 2, {}, rho0, -6 * sig, 6 * sig, cfg);
  CHECK(std::abs(a.populations[1].back() - b.populations[1].back()) <=
        10.0 * cfg.rel_tol);
}

TEST_CASE("evolve input validation") {
  DensityMatrix bad{CMat(2), 1e-9};
  bad.matrix(0, 0) = 2.0;  // trace 2
  IntegratorConfig cfg;
  CHECK_THROWS_AS(evolve(zero_ham(2), 2, {}, bad, 0.0, 1.0, cfg),
                  std::invalid_argument);

  DensityMatrix ok = basis_state(2, 0);
  cfg.sample_times = {5.0};
  CHECK_THROWS_AS(evolve(zero_ham(2), 2, {}, ok, 0.0, 1.0, cfg),
                  std::invalid_argument);
  cfg.sample_times = {0.8, 0.2};
  CHECK_THROWS_AS(evolve(zero_ham(2), 2, {}, ok, 0.0, 1.0, cfg),
                  std::invalid_argument);

  cfg.sample_times.clear();
  SimResult r = evolve(zero_ham(2), 2, {}, ok, 0.0, 1.0, cfg);
  CHECK_THROWS_AS(final_population(r, "h1"), std::invalid_argument);  // no labels
  r.labels = {"h1", "h2"};
  CHECK(final_population(r, "h1") == doctest::Approx(1.0));
  CHECK_THROWS_AS(final_population(r, "h9"), std::invalid_argument);
}

TEST_CASE("unresolvable dynamics report step underflow") {
  HamFn wild = [](double, CMat& h) {
    h = CMat(2);
    h(0, 1) = 1e18;
    h(1, 0) = 1e18;
  };
  DensityMatrix rho0 = basis_state(2, 0);
  IntegratorConfig cfg;
  CHECK_THROWS_AS(evolve(wild, 2, {}, rho0, 0.0, 1.0, cfg), EvolveError);
}
