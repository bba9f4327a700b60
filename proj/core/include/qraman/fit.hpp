#pragma once

#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qraman/matrix.hpp"

namespace qraman {

enum class FitModel { gaussian, sinusoid, exp_decay, lorentzian, saturation };

// Parameter names per model:
//   gaussian:   amp, center, sigma, offset   amp*exp(-(x-c)^2/(2 sigma^2)) + offset
//   sinusoid:   amp, freq, phase, offset     amp*cos(2 pi freq x + phase) + offset
//   exp_decay:  amp, tau, offset             amp*exp(-x/tau) + offset
//   lorentzian: amp, center, fwhm, offset    amp*(G/2)^2/((x-c)^2+(G/2)^2) + offset
//   saturation: amp, p0                      amp*x/(p0 + x)
struct FitResult {
  std::map<std::string, double> params;
  std::map<std::string, double> uncertainties;
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string message;
};

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Damped Gauss-Newton (Levenberg-style lambda adaptation). init entries
// override the built-in heuristics; missing ones are estimated from the data.
FitResult fit(FitModel model, std::span<const double> x,
              std::span<const double> y,
              const std::map<std::string, double>& init = {});

double fit_eval(FitModel model, const std::map<std::string, double>& params,
                double x);

// In-place radix-2 FFT, n must be a power of two.
void fft_radix2(std::vector<cplx>& a, bool inverse = false);

struct Spectrum {
  std::vector<double> freq;       // THz for ps sampling
  std::vector<double> magnitude;  // Hann-windowed magnitude
  double peak_freq = 0.0;         // quadratic 3-bin refinement
  double peak_magnitude = 0.0;
};

// Magnitude spectrum of a uniformly sampled series (mean removed, Hann
// window, zero-padded). Throws on non-uniform sampling (> 1e-6 of the step).
Spectrum fft_spectrum(std::span<const double> x, std::span<const double> y);

// Amplitude of the sinusoid fitted to a fine fringe scan, frequency
// initialized from the FFT peak.
double fringe_amplitude(std::span<const double> x, std::span<const double> y);

}  // namespace qraman
