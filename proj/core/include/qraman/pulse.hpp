#pragma once

#include <cstdint>
#include <vector>

#include "qraman/constants.hpp"

namespace qraman {

enum class PulseRole { pump, stokes };

// Gaussian envelope with the area defined on the reference transition
// (dipole mu = 1):  envelope(t) = area/(sigma*sqrt(2*pi)) * exp(-(t-c)^2/(2 sigma^2))
struct PulseSpec {
  double center = 0.0;  // ps
  double fwhm = 8.49;   // ps
  double area = 0.0;    // rad, mu = 1 reference
  double phase = 0.0;   // rad
  PulseRole role = PulseRole::pump;
};

double sigma_from_fwhm(double fwhm);
// instantaneous Rabi scale in rad/ps for mu = 1
double envelope(const PulseSpec& p, double t);
void validate(const PulseSpec& p);

// Pump/Stokes pair sharing center and width. The relative phase Phi is
// carried on the Stokes component.
struct RamanPulse {
  PulseSpec pump;
  PulseSpec stokes;

  static RamanPulse make(double center, double fwhm, double pump_area,
                         double stokes_area_ref, double phase);

  double center() const { return 0.5 * (pump.center + stokes.center); }
  double fwhm() const { return pump.fwhm; }
  double sigma() const { return sigma_from_fwhm(pump.fwhm); }
  double relative_phase() const { return stokes.phase; }

  // intra-pair delay (delay-scan only): stokes.center - pump.center
  double pump_stokes_delay() const { return stokes.center - pump.center; }
  void set_pump_stokes_delay(double d);
};

void validate(const RamanPulse& p);

struct PulseSequence {
  std::vector<RamanPulse> pulses;
  double t_start = 0.0;
  double t_end = 0.0;

  // window = [min center - margin_sigmas*sigma, max center + margin_sigmas*sigma]
  static PulseSequence over(std::vector<RamanPulse> pulses,
                            double margin_sigmas = 6.0);
};

void validate(const PulseSequence& s);

// Gaussian jitter magnitudes given as FWHM values (Supp. noise model).
struct NoiseSpec {
  double phase_fwhm = 0.037 * kPi;     // rad, additive on each pulse phase
  double span_fraction_fwhm = 0.018;   // relative, scales the commanded phase
  double area_fraction_fwhm = 0.0054;  // relative, scales both pulse areas
  uint64_t seed = 0;
};

// Deterministic copy-with-jitter: draws come from a counter-based stream
// keyed on (seed, sample_index, pulse_index). Same inputs, same bits.
PulseSequence perturb(const PulseSequence& seq, const NoiseSpec& noise,
                      uint64_t sample_index);

// SplitMix64 counter stream + Box-Muller. No libstdc++ distribution types so
// that a (seed, index) pair maps to the same draws in every build.
class GaussianStream {
 public:
  explicit GaussianStream(uint64_t key) : state_(key) {}
  double next_uniform();  // in (0, 1)
  double next_normal();   // standard normal

 private:
  uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

uint64_t stream_key(uint64_t seed, uint64_t sample_index, uint64_t pulse_index);

}  // namespace qraman
