#include <doctest.h>

#include <cmath>

#include "qraman/constants.hpp"
#include "qraman/system.hpp"

using namespace qraman;

namespace {

EnergySpec paper_energies() {
  EnergySpec e;
  e.delta_hot = 3.5;
  e.delta13 = 8.62;
  return e;
}

PulseSequence paper_seq(double pump_area = 1.93 * kPi,
                        double stokes_ref = 2.0 * kPi / (1.0 / 4.8),
                        double phase = 0.0) {
  return PulseSequence::over({RamanPulse::make(0.0, 8.49, pump_area, stokes_ref, phase)}, 6.0);
}

}  // namespace

TEST_CASE("level systems expose the documented bases") {
  CHECK(LevelSystem{SystemKind::FourLevelHot}.labels() ==
        std::vector<std::string>{"h1", "T+", "T+*", "h2"});
  CHECK(LevelSystem{SystemKind::FourLevelHigh}.labels() ==
        std::vector<std::string>{"h1", "T+", "h2", "h3"});
  CHECK(LevelSystem{SystemKind::ThreeLevel}.h2_index() == 2);
  CHECK(LevelSystem{SystemKind::FourLevelHot}.h2_index() == 3);
  CHECK(LevelSystem{SystemKind::FourLevelHigh}.observable_index() == 3);
  CHECK_THROWS_AS(LevelSystem{SystemKind::ThreeLevel}.index_of("T+*"),
                  std::invalid_argument);
}

TEST_CASE("rotating-frame diagonal with the drive off") {
  const LevelSystem sys{SystemKind::FourLevelHot};
  const EnergySpec e = paper_energies();
  const DipoleSet d;
  const auto seq = paper_seq(0.0, 0.0);
  const CMat h = h_rot(sys, e, d, seq, 0.3);
  CHECK(h(0, 0).real() == doctest::Approx(e.big_delta / kHbar).epsilon(1e-12));
  CHECK(std::abs(h(1, 1)) <= 1e-12);
  CHECK(h(2, 2).real() == doctest::Approx(*e.delta_hot / kHbar).epsilon(1e-12));
  CHECK(h(3, 3).real() ==
        doctest::Approx((e.big_delta - e.small_delta) / kHbar).epsilon(1e-12));
  double off = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (i != j) off = std::max(off, std::abs(h(i, j)));
  CHECK(off <= 1e-14);
}

TEST_CASE("rotating-frame hermiticity and entry structure") {
  const LevelSystem sys{SystemKind::FourLevelHot};
  const EnergySpec e = paper_energies();
  const DipoleSet d;
  const auto seq = paper_seq(1.93 * kPi, 9.6 * kPi, 0.7);
  for (double t : {-5.0, -1.1, 0.0, 0.37, 2.9, 7.3})
    CHECK(h_rot(sys, e, d, seq, t).hermiticity_defect() <= 1e-12);

  // direct evaluation of the drive entries at one time point
  const double t = 0.37;
  const CMat h = h_rot(sys, e, d, seq, t);
  const double beat = (e.delta12 + e.small_delta) / kHbar;
  const auto& p = seq.pulses[0];
  const double gp = envelope(p.pump, t);
  const double gs = envelope(p.stokes, t);
  const cplx eneg = std::polar(1.0, -beat * t);
  const cplx psi = std::polar(1.0, p.relative_phase());  // center = 0
  const cplx expect01 = 0.5 * d.mu1 * (gp + gs * eneg * psi);
  const cplx expect13 = 0.5 * d.mu2 * (gp * eneg + gs * std::conj(psi));
  CHECK(std::abs(h(0, 1) - expect01) <= 1e-12);
  CHECK(std::abs(h(1, 3) - expect13) <= 1e-12);
  // hot-trion rows share the same structure scaled by mu3/mu4
  CHECK(std::abs(h(0, 2) - expect01 * (d.mu3 / d.mu1)) <= 1e-12);
  CHECK(std::abs(h(2, 3) - expect13 * (d.mu4 / d.mu2)) <= 1e-12);

  // swapping pump and Stokes areas swaps the envelope factors
  auto swapped = paper_seq(9.6 * kPi, 1.93 * kPi, 0.7);
  const CMat hs = h_rot(sys, e, d, swapped, t);
  CHECK(std::abs(hs(0, 1) - 0.5 * d.mu1 * (gs + gp * eneg * psi)) <= 1e-12);
  CHECK(std::abs(hs(1, 3) - 0.5 * d.mu2 * (gs * eneg + gp * std::conj(psi))) <= 1e-12);
}

TEST_CASE("high-orbital frame follows its own beat and diagonal") {
  const LevelSystem sys{SystemKind::FourLevelHigh};
  EnergySpec e = paper_energies();
  DipoleSet d;
  d.mu5 = 0.1;
  const auto seq = paper_seq(0.0, 0.0);
  const CMat h = h_rot(sys, e, d, seq, 1.0);
  const double d23 = (*e.delta13 - e.delta12) / kHbar;
  CHECK(h(2, 2).real() ==
        doctest::Approx((e.big_delta - e.small_delta) / kHbar - d23).epsilon(1e-12));
  CHECK(h(3, 3).real() ==
        doctest::Approx((e.big_delta - e.small_delta) / kHbar).epsilon(1e-12));
  CHECK(beat_frequency(sys, e) ==
        doctest::Approx((*e.delta13 + e.small_delta) / kHbar).epsilon(1e-12));

  EnergySpec missing;
  CHECK_THROWS_WITH_AS(h_rot(sys, missing, d, seq, 0.0),
                       doctest::Contains("delta13_mev"), std::invalid_argument);
  DipoleSet nomu5;
  CHECK_THROWS_WITH_AS(h_rot(sys, e, nomu5, seq, 0.0),
                       doctest::Contains("mu5"), std::invalid_argument);
  EnergySpec nohot;
  CHECK_THROWS_WITH_AS(h_rot(LevelSystem{SystemKind::FourLevelHot}, nohot, d, seq, 0.0),
                       doctest::Contains("delta_hot"), std::invalid_argument);
}

TEST_CASE("lab frame: zero-field diagonal and u0 properties") {
  const LevelSystem sys{SystemKind::FourLevelHot};
  const EnergySpec e = paper_energies();
  const DipoleSet d;
  const double omega_t = 50.0;
  const auto seq = paper_seq(0.0, 0.0);
  const CMat h = h_lab(sys, e, d, seq, omega_t, 0.8);
  CHECK(std::abs(h(0, 0)) <= 1e-12);
  CHECK(h(1, 1).real() == doctest::Approx(omega_t).epsilon(1e-12));
  CHECK(h(2, 2).real() == doctest::Approx(omega_t + *e.delta_hot / kHbar).epsilon(1e-12));
  CHECK(h(3, 3).real() == doctest::Approx(e.delta12 / kHbar).epsilon(1e-12));

  const CMat u_at_0 = u0(sys, e, omega_t, 0.0);
  CHECK((u_at_0 - CMat::identity(4)).max_abs() <= 1e-15);
  for (double t : {0.3, 1.7, 9.2}) {
    const CMat u = u0(sys, e, omega_t, t);
    CHECK((u * u.adjoint() - CMat::identity(4)).max_abs() <= 1e-12);
    cplx det = 1.0;
    for (int i = 0; i < 4; ++i) det *= u(i, i);
    CHECK(std::abs(std::abs(det) - 1.0) <= 1e-12);
  }
}

TEST_CASE("u0 transforms the lab frame into the rotating frame") {
  // H_rot = U0^dag H_lab U0 + i (dU0^dag/dt) U0, derivative by central
  // differences. Small omega_t keeps the finite-difference error well below
  // the 1e-9 gate.
  const LevelSystem sys{SystemKind::ThreeLevel};
  const EnergySpec e = paper_energies();
  const DipoleSet d;
  const auto seq = paper_seq(1.93 * kPi, 9.6 * kPi, 0.4);
  // finite differencing e^{i w t} bottoms out near eps*|w t|/(2 dt); small
  // |t| keeps that floor well under the 1e-9 gate
  const double omega_t = 5.0;
  const double dt = 4e-6;
  for (double t : {-1.0, -0.3, 0.0, 0.5, 1.234}) {
    const CMat hl = h_lab(sys, e, d, seq, omega_t, t);
    const CMat u = u0(sys, e, omega_t, t);
    // Richardson-extrapolated central difference of dU0^dag/dt
    auto central = [&](double h) {
      CMat diff = u0(sys, e, omega_t, t + h).adjoint() -
                  u0(sys, e, omega_t, t - h).adjoint();
      diff *= cplx(1.0 / (2.0 * h), 0.0);
      return diff;
    };
    CMat d1 = central(dt);
    CMat d2 = central(0.5 * dt);
    d2 *= cplx(4.0 / 3.0, 0.0);
    d1 *= cplx(1.0 / 3.0, 0.0);
    CMat dudag = d2 - d1;
    CMat rot = (u.adjoint() * hl) * u;
    CMat corr = dudag * u;
    corr *= cplx(0.0, 1.0);
    rot += corr;
    const CMat expect = h_rot(sys, e, d, seq, t);
    CHECK((rot - expect).max_abs() <= 1e-9);
  }
}

TEST_CASE("rotating-frame entries are continuous in time") {
  const LevelSystem sys{SystemKind::FourLevelHot};
  const EnergySpec e = paper_energies();
  const DipoleSet d;
  const auto seq = paper_seq(1.93 * kPi, 9.6 * kPi, 0.3);
  const double beat = (e.delta12 + e.small_delta) / kHbar;
  const double sig = sigma_from_fwhm(8.49);
  const double peak = 9.6 * kPi / (sig * std::sqrt(2.0 * kPi));
  // loose analytic slope bound: beat rotation of the couplings plus the
  // steepest envelope change (|g'| <= peak/(sigma sqrt(e)))
  const double bound = beat * peak + 2.0 * peak / sig;
  const double dt = 1e-4;
  for (double t = -8.0; t < 8.0; t += 0.37) {
    const CMat a = h_rot(sys, e, d, seq, t);
    const CMat b = h_rot(sys, e, d, seq, t + dt);
    CHECK((b - a).max_abs() <= bound * dt);
  }
}

TEST_CASE("dissipators: rates, shapes, and relaxation direction") {
  const LevelSystem sys{SystemKind::FourLevelHot};
  CHECK(dissipators(sys, 0.0, 0.0).empty());
  const auto ds = dissipators(sys, 1.0 / 263.0, 1.0 / 159.0);
  REQUIRE(ds.size() == 2);
  CHECK(ds[0].rate == doctest::Approx(1.0 / 263.0));
  CHECK(ds[1].rate == doctest::Approx(1.0 / 159.0));
  CHECK(std::abs(ds[0].op(3, 3) - cplx(1.0)) <= 1e-15);  // |h2><h2|
  CHECK(std::abs(ds[1].op(0, 3) - cplx(1.0)) <= 1e-15);  // |h1><h2|

  // A2 applied to |h2><h2| feeds |h1>
  CMat rho(4);
  rho(3, 3) = 1.0;
  const CMat l = lindblad_apply(ds[1].op, rho);
  CHECK(l(0, 0).real() == doctest::Approx(2.0));
  CHECK(l(3, 3).real() == doctest::Approx(-2.0));
  CHECK_THROWS_AS(dissipators(sys, -1.0, 0.0), std::invalid_argument);
}

TEST_CASE("effective two-level drive") {
  EnergySpec e = paper_energies();
  const DipoleSet d;

  auto pulse = RamanPulse::make(0.0, 8.49, 1.93 * kPi, 0.0, 0.0);
  auto drv = effective_two_level(e, d, pulse, 0.0);
  CHECK(drv.omega_eff == 0.0);  // zero Stokes area

  // symmetric limit: mu1 = mu2, delta = 0, delta12 -> infinity
  EnergySpec sym = e;
  sym.small_delta = 0.0;
  sym.delta12 = 1e6;
  DipoleSet dsym;
  dsym.mu2 = 1.0;
  auto p2 = RamanPulse::make(0.0, 8.49, kPi, 0.8 * kPi, 0.0);
  const double t = 1.3;
  const auto drv2 = effective_two_level(sym, dsym, p2, t);
  const double op = envelope(p2.pump, t);
  const double os = envelope(p2.stokes, t);
  const double D = sym.big_delta / kHbar;
  CHECK(drv2.detuning_eff ==
        doctest::Approx((op * op - os * os) / (4.0 * D)).epsilon(1e-6));
  CHECK(drv2.omega_eff == doctest::Approx(op * os / (2.0 * D)).epsilon(1e-12));

  // validity warning once the pump peak exceeds Delta/(3 hbar)
  auto strong = RamanPulse::make(0.0, 8.49, 1.93 * kPi, kPi, 0.0);
  CHECK(effective_two_level(e, d, strong, 0.0).validity_warning);
  EnergySpec big = e;
  big.big_delta = 10.0;
  CHECK_FALSE(effective_two_level(big, d, strong, 0.0).validity_warning);
}
