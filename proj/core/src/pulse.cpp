#include "qraman/pulse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qraman {

double sigma_from_fwhm(double fwhm) { return fwhm / kFwhmToSigma; }

double envelope(const PulseSpec& p, double t) {
  const double sig = sigma_from_fwhm(p.fwhm);
  const double x = (t - p.center) / sig;
  return p.area / (sig * std::sqrt(2.0 * kPi)) * std::exp(-0.5 * x * x);
}

void validate(const PulseSpec& p) {
  if (!(p.fwhm > 0.0)) throw std::invalid_argument("PulseSpec: fwhm must be > 0");
  if (!(p.area >= 0.0)) throw std::invalid_argument("PulseSpec: area must be >= 0");
  if (!std::isfinite(p.phase) || !std::isfinite(p.center))
    throw std::invalid_argument("PulseSpec: non-finite field");
}

RamanPulse RamanPulse::make(double center, double fwhm, double pump_area,
                            double stokes_area_ref, double phase) {
  RamanPulse rp;
  rp.pump = PulseSpec{center, fwhm, pump_area, 0.0, PulseRole::pump};
  rp.stokes = PulseSpec{center, fwhm, stokes_area_ref, phase, PulseRole::stokes};
  validate(rp);
  return rp;
}

void RamanPulse::set_pump_stokes_delay(double d) {
  const double c = center();
  pump.center = c - 0.5 * d;
  stokes.center = c + 0.5 * d;
}

void validate(const RamanPulse& p) {
  validate(p.pump);
  validate(p.stokes);
  if (p.pump.role != PulseRole::pump || p.stokes.role != PulseRole::stokes)
    throw std::invalid_argument("RamanPulse: roles must be {pump, stokes}");
  if (p.pump.fwhm != p.stokes.fwhm)
    throw std::invalid_argument("RamanPulse: pump and stokes must share fwhm");
}

PulseSequence PulseSequence::over(std::vector<RamanPulse> pulses,
                                  double margin_sigmas) {
  if (pulses.empty())
    throw std::invalid_argument("PulseSequence: no pulses");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& p : pulses) {
    const double s = p.sigma();
    lo = std::min({lo, p.pump.center - margin_sigmas * s,
                   p.stokes.center - margin_sigmas * s});
    hi = std::max({hi, p.pump.center + margin_sigmas * s,
                   p.stokes.center + margin_sigmas * s});
  }
  PulseSequence seq{std::move(pulses), lo, hi};
  validate(seq);
  return seq;
}

void validate(const PulseSequence& s) {
  if (s.pulses.empty())
    throw std::invalid_argument("PulseSequence: no pulses");
  for (const auto& p : s.pulses) validate(p);
  for (const auto& p : s.pulses) {
    const double sig = p.sigma();
    if (!(s.t_start < std::min(p.pump.center, p.stokes.center) - 4.0 * sig) ||
        !(s.t_end > std::max(p.pump.center, p.stokes.center) + 4.0 * sig))
      throw std::invalid_argument(
          "PulseSequence: window must clear every pulse center by 4 sigma");
  }
}

double GaussianStream::next_uniform() {
  state_ += 0x9E3779B97F4A7C15ull;
  uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  z ^= z >> 31;
  return (static_cast<double>(z >> 11) + 0.5) * 0x1.0p-53;
}

double GaussianStream::next_normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  const double u1 = next_uniform();
  const double u2 = next_uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * kPi * u2;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return r * std::cos(a);
}

uint64_t stream_key(uint64_t seed, uint64_t sample_index, uint64_t pulse_index) {
  // FNV-1a over the three words
  uint64_t h = 0xCBF29CE484222325ull;
  for (uint64_t w : {seed, sample_index, pulse_index}) {
    for (int i = 0; i < 8; ++i) {
      h ^= (w >> (8 * i)) & 0xFFull;
      h *= 0x100000001B3ull;
    }
  }
  return h;
}

PulseSequence perturb(const PulseSequence& seq, const NoiseSpec& noise,
                      uint64_t sample_index) {
  if (noise.phase_fwhm < 0.0 || noise.span_fraction_fwhm < 0.0 ||
      noise.area_fraction_fwhm < 0.0)
    throw std::invalid_argument("NoiseSpec: FWHM values must be >= 0");

  const double sig_phase = noise.phase_fwhm / kFwhmToSigma;
  const double sig_span = noise.span_fraction_fwhm / kFwhmToSigma;
  const double sig_area = noise.area_fraction_fwhm / kFwhmToSigma;

  PulseSequence out = seq;
  for (size_t k = 0; k < out.pulses.size(); ++k) {
    GaussianStream g(stream_key(noise.seed, sample_index, k));
    // frozen draw order: phase offset, span scale, area scale
    const double n_phase = g.next_normal();
    const double n_span = g.next_normal();
    const double n_area = g.next_normal();
    auto& p = out.pulses[k];
    if (sig_phase > 0.0 || sig_span > 0.0)
      p.stokes.phase = p.stokes.phase * (1.0 + n_span * sig_span) +
                       n_phase * sig_phase;
    if (sig_area > 0.0) {
      const double s = 1.0 + n_area * sig_area;
      p.pump.area = std::max(0.0, p.pump.area * s);
      p.stokes.area = std::max(0.0, p.stokes.area * s);
    }
  }
  return out;
}

}  // namespace qraman
