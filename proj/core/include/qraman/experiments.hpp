#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "qraman/evolve.hpp"
#include "qraman/pulse.hpp"
#include "qraman/system.hpp"

namespace qraman {

// Named uniform sweep axis. Values are in internal units (meV, rad, ps);
// display_scale divides values on output (e.g. pi for *_pi columns).
struct Axis {
  std::string name;
  double lo = 0.0;
  double hi = 0.0;
  int count = 0;
  double display_scale = 1.0;

  double value(int i) const;
  void validate() const;
};

struct SweepTable {
  std::vector<Axis> axes;  // 1 or 2
  std::string observable = "c_h2";
  std::vector<double> values;  // row-major over axes
  std::map<std::string, std::string> metadata;

  std::size_t size() const { return values.size(); }
  std::size_t index(int i, int j = 0) const;
  double max_value() const;
  // (axis0, axis1) location of the maximum, ties toward the first scan order
  std::pair<double, double> argmax() const;
  void write_csv(std::ostream& os) const;
};

struct ExperimentConfig {
  LevelSystem system{SystemKind::FourLevelHot};
  EnergySpec energies{};
  DipoleSet dipoles{};
  double fwhm_ps = 8.49;
  double pump_area = 1.93 * kPi;       // mu1-referenced, rad
  double stokes_area_target = 0.0;     // Theta_S on the target transition, rad
  double phase = 0.0;                  // rad
  IntegratorConfig integrator{};
  double gamma1 = 0.0;                 // 1/ps
  double gamma2 = 0.0;                 // 1/ps
  std::optional<NoiseSpec> noise;
  std::uint64_t seed = 0;
  double window_sigmas = 6.0;

  // set by noise_monte_carlo: every sequence built for grid point i is run
  // through perturb(seq, noise, sample_index * stride + i)
  struct ActiveNoise {
    NoiseSpec spec;
    std::uint64_t sample_index = 0;
    std::uint64_t stride = 0;
  };
  std::optional<ActiveNoise> active_noise;
};

// mu of the transition that defines Theta_S (mu2, or mu5 for the
// high-orbital system)
double target_mu(const ExperimentConfig& cfg);

// Raman pulse whose Stokes area is given on the target transition.
RamanPulse make_raman_pulse(const ExperimentConfig& cfg, double center,
                            double theta_s_target, double phase);

// Effective max_step honoring min(sigma/20, configured max_step).
IntegratorConfig effective_integrator(const ExperimentConfig& cfg);

// Final population of the observable level for one pulse sequence.
double run_sequence(const ExperimentConfig& cfg, const PulseSequence& seq,
                    std::uint64_t point_index = 0);

// Full time trace for one sequence (labels filled in).
SimResult run_sequence_trace(const ExperimentConfig& cfg,
                             const PulseSequence& seq,
                             std::vector<double> sample_times,
                             std::uint64_t point_index = 0);

SweepTable rabi_sweep(const ExperimentConfig& cfg, const Axis& stokes_area_axis);
SweepTable detuning_area_map(const ExperimentConfig& cfg, const Axis& delta_axis,
                             const Axis& stokes_area_axis);
SweepTable delay_scan(const ExperimentConfig& cfg, const Axis& delay_axis);
SweepTable ramsey_scan(const ExperimentConfig& cfg, const Axis& interval_axis,
                       std::span<const double> phase_values);

struct FringePoint {
  double interval = 0.0;
  double amplitude = 0.0;
  bool converged = false;
};
std::vector<FringePoint> coherence_decay_scan(
    const ExperimentConfig& cfg, std::span<const double> coarse_intervals);

SweepTable phase_area_map(const ExperimentConfig& cfg, const Axis& theta_axis,
                          const Axis& phase_axis, double fixed_interval);
SweepTable t1_probe(const ExperimentConfig& cfg, const Axis& interval_axis);

// detuning_area_map on the high-orbital system, observable rho_h3h3.
SweepTable high_orbital_map(const ExperimentConfig& cfg, const Axis& delta_axis,
                            const Axis& stokes_area_axis);

SweepTable noise_monte_carlo(
    const ExperimentConfig& cfg,
    const std::function<SweepTable(const ExperimentConfig&)>& inner,
    int n_samples);

// saturation-law readout scaling: c_h2 * p_cw / (p0 + p_cw)
double readout_signal(double c_h2, double p_cw, double p0);

// First transfer maximum versus Theta_S at the configured two-photon
// detuning; golden-section refinement of the bracketing grid interval.
double pi_area_at_delta(const ExperimentConfig& cfg, double area_lo,
                        double area_hi, int grid = 41);

// Stokes area on the rising branch where a lone pulse moves half the
// population, i.e. a transfer-calibrated pi/2 pulse. pi_area bounds the
// bracket; throws if the branch never reaches 0.5.
double half_transfer_area(const ExperimentConfig& cfg, double pi_area);

// Ramsey fringe frequency of the qubit, THz (equals delta12/h; the
// two-photon detuning cancels against the beat-phase slide).
double fringe_frequency(const ExperimentConfig& cfg);

}  // namespace qraman
