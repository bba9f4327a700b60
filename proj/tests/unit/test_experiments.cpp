#include <doctest.h>

#include <cmath>
#include <sstream>

#include "qraman/constants.hpp"
#include "qraman/experiments.hpp"
#include "qraman/fit.hpp"

using namespace qraman;

namespace {

ExperimentConfig three_level_cfg() {
  ExperimentConfig cfg;
  cfg.system.kind = SystemKind::ThreeLevel;
  return cfg;
}

ExperimentConfig calibrated_three_level() {
  ExperimentConfig cfg = three_level_cfg();
  cfg.energies.small_delta = 0.25;
  cfg.stokes_area_target = 2.0 * kPi;
  return cfg;
}

}  // namespace

TEST_CASE("readout scaling follows the saturation law") {
  CHECK(readout_signal(0.8, 0.0, 396.0) == 0.0);
  CHECK(readout_signal(0.8, 396.0, 396.0) == doctest::Approx(0.4));
  // operating point 400 nW vs P0 = 396 nW: saturation factor 0.5025; the
  // quoted ~25% readout probability is the excited-state fraction, half of it
  CHECK(readout_signal(1.0, 400.0, 396.0) == doctest::Approx(0.502513).epsilon(1e-5));
  CHECK_THROWS_AS(readout_signal(0.5, -1.0, 396.0), std::invalid_argument);
}

TEST_CASE("rabi sweep: zero Stokes leaves h2 empty, pi point transfers") {
  ExperimentConfig cfg = calibrated_three_level();
  Axis ax{"stokes_area_pi", 0.0, 2.0 * kPi, 2, kPi};
  const SweepTable t = rabi_sweep(cfg, ax);
  CHECK(t.values[0] <= 0.02);
  CHECK(t.values[1] >= 0.97);
  for (double v : t.values) {
    CHECK(v >= -1e-6);
    CHECK(v <= 1.0 + 1e-6);
  }
}

TEST_CASE("delay scan peaks at zero delay and dies off the overlap") {
  ExperimentConfig cfg = calibrated_three_level();
  Axis ax{"delay_ps", -30.0, 30.0, 3, 1.0};
  const SweepTable t = delay_scan(cfg, ax);
  CHECK(t.values[1] >= 0.9);
  CHECK(t.values[0] <= 0.02);
  CHECK(t.values[2] <= 0.02);
}

TEST_CASE("ramsey fringes invert under a pi phase shift") {
  ExperimentConfig cfg = calibrated_three_level();
  cfg.stokes_area_target = 1.0 * kPi;  // ~pi/2 pulse
  Axis interval{"interval_ps", 18.0, 22.0, 41, 1.0};
  const double phases[] = {0.0, kPi};
  const SweepTable t = ramsey_scan(cfg, interval, phases);

  std::vector<double> xs(interval.count), y0(interval.count), y1(interval.count);
  for (int i = 0; i < interval.count; ++i) {
    xs[i] = interval.value(i);
    y0[i] = t.values[t.index(i, 0)];
    y1[i] = t.values[t.index(i, 1)];
  }
  const FitResult f0 = fit(FitModel::sinusoid, xs, y0);
  const FitResult f1 = fit(FitModel::sinusoid, xs, y1);
  REQUIRE(f0.converged);
  REQUIRE(f1.converged);
  CHECK(std::abs(f0.params.at("amp") - f1.params.at("amp")) /
            f0.params.at("amp") <=
        0.03);
  // compare fringe phases at the scan center so that the small frequency
  // difference between the two fits cannot leak into the phase reading
  const double xc = 0.5 * (xs.front() + xs.back());
  auto phase_at_center = [xc](const FitResult& f) {
    return 2.0 * kPi * f.params.at("freq") * xc + f.params.at("phase");
  };
  const double dphi =
      std::remainder(phase_at_center(f0) - phase_at_center(f1), 2.0 * kPi);
  CHECK(std::abs(std::abs(dphi) - kPi) <= 0.05);
}

TEST_CASE("t1 probe is flat without relaxation") {
  ExperimentConfig cfg = calibrated_three_level();
  Axis ax{"interval_ps", 25.0, 300.0, 12, 1.0};
  const SweepTable t = t1_probe(cfg, ax);
  for (double v : t.values)
    CHECK(std::abs(v - t.values.front()) <= 1e-6);
}

TEST_CASE("phase-area map: a zero-area control leaves the probe's 0.5") {
  ExperimentConfig cfg = calibrated_three_level();
  Axis theta{"theta_pi", 0.0, 2.0 * kPi, 3, kPi};
  Axis phase{"phase_rad", 0.0, 2.0 * kPi, 5, 1.0};
  const double period = 1.0 / fringe_frequency(cfg);
  const SweepTable t = phase_area_map(cfg, theta, phase, 21.0 * period);
  for (int j = 0; j < phase.count; ++j)
    CHECK(std::abs(t.values[t.index(0, j)] - 0.5) <= 0.02);
  // 2 pi phase period: the first and last phase columns coincide
  for (int i = 0; i < theta.count; ++i)
    CHECK(t.values[t.index(i, 0)] ==
          doctest::Approx(t.values[t.index(i, phase.count - 1)]).epsilon(1e-9));
}

TEST_CASE("high-orbital map reduces to the three-level map on relabeling") {
  // true relabeling: decouple h2 (mu2 = 0) and give h3 the h2 dipole; with
  // delta13 = delta12 the {h1, T+, h3} block is the three-level system.
  // (mu5 = mu2 with both couplings on is NOT a relabeling: two degenerate
  // levels driven equally form a bright/dark pair instead.)
  ExperimentConfig high;
  high.system.kind = SystemKind::FourLevelHigh;
  high.energies.delta13 = high.energies.delta12;
  high.dipoles.mu5 = high.dipoles.mu2;
  high.dipoles.mu2 = 0.0;
  high.energies.small_delta = 0.25;

  ExperimentConfig three = three_level_cfg();
  three.energies.small_delta = 0.25;

  Axis dax{"delta_mev", 0.1, 0.3, 3, 1.0};
  Axis aax{"stokes_area_pi", 0.5 * kPi, 2.5 * kPi, 3, kPi};
  const SweepTable th = high_orbital_map(high, dax, aax);
  const SweepTable t3 = detuning_area_map(three, dax, aax);
  CHECK(th.observable == "c_h3");
  CHECK_THROWS_AS(high_orbital_map(three, dax, aax), std::invalid_argument);
  for (size_t i = 0; i < th.values.size(); ++i)
    CHECK(std::abs(th.values[i] - t3.values[i]) <= 1e-6);

  // zero Stokes area moves nothing to h3
  Axis a0{"stokes_area_pi", 0.0, 0.0, 1, kPi};
  const SweepTable z = high_orbital_map(high, dax, a0);
  for (double v : z.values) CHECK(v <= 0.02);
}

TEST_CASE("noise monte carlo: identity and determinism contracts") {
  ExperimentConfig cfg = calibrated_three_level();
  cfg.stokes_area_target = 1.0 * kPi;
  cfg.seed = 77;
  Axis interval{"interval_ps", 19.0, 21.0, 9, 1.0};
  const double phases[] = {0.0};
  auto inner = [&](const ExperimentConfig& c) {
    return ramsey_scan(c, interval, phases);
  };

  // zero noise, one sample: identical to the deterministic run, bitwise
  NoiseSpec zero;
  zero.phase_fwhm = zero.span_fraction_fwhm = zero.area_fraction_fwhm = 0.0;
  cfg.noise = zero;
  const SweepTable base = inner(cfg);
  const SweepTable mc0 = noise_monte_carlo(cfg, inner, 1);
  for (size_t i = 0; i < base.values.size(); ++i)
    CHECK(mc0.values[i] == base.values[i]);

  // same seed -> identical tables, bitwise
  cfg.noise = NoiseSpec{};
  const SweepTable a = noise_monte_carlo(cfg, inner, 4);
  const SweepTable b = noise_monte_carlo(cfg, inner, 4);
  for (size_t i = 0; i < a.values.size(); ++i) CHECK(a.values[i] == b.values[i]);

  std::ostringstream sa, sb;
  a.write_csv(sa);
  b.write_csv(sb);
  CHECK(sa.str() == sb.str());
}

TEST_CASE("sweep tables serialize with a header and full row count") {
  ExperimentConfig cfg = calibrated_three_level();
  Axis dax{"delta_mev", 0.2, 0.3, 2, 1.0};
  Axis aax{"stokes_area_pi", 1.8 * kPi, 2.2 * kPi, 3, kPi};
  const SweepTable t = detuning_area_map(cfg, dax, aax);
  for (double v : t.values) {
    CHECK(v >= -1e-6);
    CHECK(v <= 1.0 + 1e-6);
  }
  std::ostringstream os;
  t.write_csv(os);
  std::istringstream is(os.str());
  std::string line;
  REQUIRE(std::getline(is, line));
  CHECK(line == "delta_mev,stokes_area_pi,c_h2");
  int rows = 0;
  while (std::getline(is, line))
    if (!line.empty()) ++rows;
  CHECK(rows == dax.count * aax.count);
}
