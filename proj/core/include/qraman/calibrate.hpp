#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "qraman/experiments.hpp"

namespace qraman {

struct CalibrationTable {
  double delta_star = 0.0;      // meV
  double stokes_area_pi = 0.0;  // rad, target-transition-referenced
  double pump_area = 0.0;       // rad, mu1-referenced
  double transfer_at_pi = 0.0;
  std::string system_hash;
  bool boundary_warning = false;  // best grid point sat on the scan boundary
};

class CalibrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Coarse grid scan of the final transfer over (delta, Theta_S), then
// derivative-free simplex refinement from the best grid point. Grid ties
// break toward smallest delta, then smallest area. Throws CalibrationError
// when the best transfer stays below 0.5 (no usable pi condition).
CalibrationTable find_pi_condition(const ExperimentConfig& cfg,
                                   std::pair<double, double> delta_range,
                                   std::pair<double, double> area_range,
                                   int grid_delta = 21, int grid_area = 21);

struct SynthesisResult {
  RamanPulse pulse;
  double delta_star = 0.0;       // two-photon detuning the pulse assumes, meV
  double target_c_h2 = 0.0;      // sin^2(theta/2)
  double verified_c_h2 = 0.0;    // full-model verification from |h1>
  bool verification_warning = false;  // |verified - target| > 0.03
};

// Pulse parameters for a target Bloch rotation (theta, phi): Stokes area
// scales linearly through the calibrated pi point, phase sets the azimuth.
// The verification hook runs the full model and flags (never hides) a
// mismatch beyond 0.03.
SynthesisResult synthesize_rotation(double theta, double phi,
                                    const CalibrationTable& cal,
                                    const ExperimentConfig& cfg);

void write_calibration(std::ostream& os, const CalibrationTable& cal);
CalibrationTable read_calibration(std::istream& is);

}  // namespace qraman
