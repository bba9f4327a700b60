#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qraman/matrix.hpp"
#include "qraman/pulse.hpp"

namespace qraman {

// Level splittings and laser detunings, meV.
struct EnergySpec {
  double delta12 = 4.31;            // h1-h2 splitting
  std::optional<double> delta_hot;  // T+ / T+* splitting, required for the hot-trion system
  std::optional<double> delta13;    // h1-h3 splitting, required for the high-orbital system
  double big_delta = 0.57;          // single-photon detuning
  double small_delta = 0.05;        // two-photon detuning

  double delta23() const;  // delta13 - delta12
};

// Relative dipole moments; transition 1 (fundamental) defines mu1 = 1.
struct DipoleSet {
  double mu1 = 1.0;
  double mu2 = 1.0 / 4.8;
  double mu3 = 1.0 / 1.25;
  double mu4 = 1.0 / 1.29;
  std::optional<double> mu5;
};

enum class SystemKind {
  ThreeLevel,        // {h1, T+, h2}
  FourLevelHot,      // {h1, T+, T+*, h2}
  FourLevelHigh,     // {h1, T+, h2, h3}
  TwoLevelEffective  // {h1, h2}
};

struct LevelSystem {
  SystemKind kind = SystemKind::ThreeLevel;

  int dim() const;
  std::vector<std::string> labels() const;
  int index_of(std::string_view label) const;  // throws on unknown label
  int h2_index() const;
  // the level whose population the experiment reads out (h2, or h3 for the
  // high-orbital system)
  int observable_index() const;
};

struct DissipatorSpec {
  CMat op;
  double rate = 0.0;  // gamma in 1/ps; the engine applies (gamma/2) L[op]
};

// Time-dependent Hamiltonian evaluator: fills h (pre-sized) at time t, rad/ps.
using HamFn = std::function<void(double t, CMat& h)>;

// Rotating-frame Hamiltonian H_rot(t)/hbar. Kinds: ThreeLevel, FourLevelHot,
// FourLevelHigh. Throws if the kind needs delta_hot / delta13 / mu5 and the
// config lacks them.
CMat h_rot(const LevelSystem& sys, const EnergySpec& e, const DipoleSet& d,
           const PulseSequence& seq, double t);
HamFn make_h_rot_fn(const LevelSystem& sys, const EnergySpec& e,
                    const DipoleSet& d, const PulseSequence& seq);

// Lab-frame Hamiltonian with explicit optical carriers, test-scale omega_t.
// Supported kinds: ThreeLevel, FourLevelHot.
CMat h_lab(const LevelSystem& sys, const EnergySpec& e, const DipoleSet& d,
           const PulseSequence& seq, double omega_t, double t);
HamFn make_h_lab_fn(const LevelSystem& sys, const EnergySpec& e,
                    const DipoleSet& d, const PulseSequence& seq,
                    double omega_t);

// Diagonal rotation operator taking the lab frame to the rotating frame.
CMat u0(const LevelSystem& sys, const EnergySpec& e, double omega_t, double t);

// Pure dephasing |h2><h2| (gamma1) and relaxation |h1><h2| (gamma2).
// Zero-rate entries are omitted.
std::vector<DissipatorSpec> dissipators(const LevelSystem& sys, double gamma1,
                                        double gamma2);

// Adiabatic elimination of T+ at one instant.
struct EffectiveDrive {
  double omega_eff = 0.0;     // rad/ps
  double detuning_eff = 0.0;  // rad/ps, dressed E(h1) - E(h2)
  bool validity_warning = false;  // peak Omega_P1 > Delta/(3 hbar)
};
EffectiveDrive effective_two_level(const EnergySpec& e, const DipoleSet& d,
                                   const RamanPulse& pulse, double t);

// Effective two-level evaluator for SystemKind::TwoLevelEffective, built from
// the same sequence/energy bookkeeping as the full model.
HamFn make_two_level_fn(const EnergySpec& e, const DipoleSet& d,
                        const PulseSequence& seq);

// Evaluator for any kind, dispatching on sys.kind.
HamFn make_hamiltonian_fn(const LevelSystem& sys, const EnergySpec& e,
                          const DipoleSet& d, const PulseSequence& seq);

// Two-photon beat frequency (Delta12 + delta)/hbar, or (Delta13 + delta)/hbar
// for the high-orbital system, rad/ps.
double beat_frequency(const LevelSystem& sys, const EnergySpec& e);

}  // namespace qraman
