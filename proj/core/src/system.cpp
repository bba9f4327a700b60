#include "qraman/system.hpp"

#include <cmath>
#include <stdexcept>

#include "qraman/constants.hpp"

namespace qraman {

namespace {

double require(const std::optional<double>& v, const char* name) {
  if (!v) throw std::invalid_argument(std::string("missing config: ") + name);
  return *v;
}

// Per-pulse drive data. The commanded Stokes phase is augmented by the beat
// phase accumulated to the pulse center, beat * c: a delay line shifts the
// pump-Stokes beat note together with the envelope. This is what makes the
// Ramsey fringe versus pulse interval oscillate at Delta12/h. The per-pulse
// single-photon (optical) phase is not tracked; it is not interferometrically
// stable in a two-color setup and drops out of two-photon observables.
struct Drive {
  double c_pump, c_stokes;  // envelope centers, ps
  double inv_sig, norm_p, norm_s;
  cplx stokes_phase;  // e^{i psi}, psi = Phi + beat * center
};

std::vector<Drive> build_drives(const PulseSequence& seq, double beat) {
  std::vector<Drive> out;
  out.reserve(seq.pulses.size());
  for (const auto& p : seq.pulses) {
    Drive d;
    const double sig = p.sigma();
    d.c_pump = p.pump.center;
    d.c_stokes = p.stokes.center;
    d.inv_sig = 1.0 / sig;
    const double nrm = 1.0 / (sig * std::sqrt(2.0 * kPi));
    d.norm_p = p.pump.area * nrm;
    d.norm_s = p.stokes.area * nrm;
    const double psi = p.relative_phase() + beat * p.center();
    d.stokes_phase = cplx(std::cos(psi), std::sin(psi));
    out.push_back(d);
  }
  return out;
}

inline double gaussian(double t, double c, double inv_sig, double norm) {
  const double x = (t - c) * inv_sig;
  return norm * std::exp(-0.5 * x * x);
}

struct RotEval {
  SystemKind kind;
  int dim;
  double diag[4];
  double beat;  // rad/ps
  double mu1, mu2, mu3, mu4, mu5;
  std::vector<Drive> drives;

  void operator()(double t, CMat& h) const {
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) h(i, j) = 0.0;
    for (int i = 0; i < dim; ++i) h(i, i) = diag[i];

    const double bt = beat * t;
    const cplx e_neg(std::cos(bt), -std::sin(bt));  // e^{-i beat t}

    for (const auto& d : drives) {
      const double gp = gaussian(t, d.c_pump, d.inv_sig, d.norm_p);
      const double gs = gaussian(t, d.c_stokes, d.inv_sig, d.norm_s);
      // h1-row couplings carry the oscillating Stokes term; h2-column
      // couplings carry the oscillating pump term.
      const cplx up = 0.5 * (gp + gs * e_neg * d.stokes_phase);
      const cplx dn = 0.5 * (gp * e_neg + gs * std::conj(d.stokes_phase));
      switch (kind) {
        case SystemKind::ThreeLevel:
          h(0, 1) += mu1 * up;
          h(1, 2) += mu2 * dn;
          break;
        case SystemKind::FourLevelHot:
          h(0, 1) += mu1 * up;
          h(0, 2) += mu3 * up;
          h(1, 3) += mu2 * dn;
          h(2, 3) += mu4 * dn;
          break;
        case SystemKind::FourLevelHigh:
          h(0, 1) += mu1 * up;
          h(1, 2) += mu2 * dn;
          h(1, 3) += mu5 * dn;
          break;
        default:
          break;
      }
    }
    for (int i = 0; i < dim; ++i)
      for (int j = i + 1; j < dim; ++j) h(j, i) = std::conj(h(i, j));
  }
};

RotEval make_rot_eval(const LevelSystem& sys, const EnergySpec& e,
                      const DipoleSet& d, const PulseSequence& seq) {
  RotEval ev;
  ev.kind = sys.kind;
  ev.dim = sys.dim();
  ev.mu1 = d.mu1;
  ev.mu2 = d.mu2;
  ev.mu3 = d.mu3;
  ev.mu4 = d.mu4;
  ev.mu5 = 0.0;
  const double D = e.big_delta / kHbar;
  const double de = e.small_delta / kHbar;
  switch (sys.kind) {
    case SystemKind::ThreeLevel:
      ev.beat = (e.delta12 + e.small_delta) / kHbar;
      ev.diag[0] = D;
      ev.diag[1] = 0.0;
      ev.diag[2] = D - de;
      break;
    case SystemKind::FourLevelHot: {
      const double dhot = require(e.delta_hot, "delta_hot_mev") / kHbar;
      ev.beat = (e.delta12 + e.small_delta) / kHbar;
      ev.diag[0] = D;
      ev.diag[1] = 0.0;
      ev.diag[2] = dhot;
      ev.diag[3] = D - de;
      break;
    }
    case SystemKind::FourLevelHigh: {
      const double d13 = require(e.delta13, "delta13_mev");
      ev.mu5 = require(d.mu5, "mu5");
      const double d23 = (d13 - e.delta12) / kHbar;
      ev.beat = (d13 + e.small_delta) / kHbar;
      ev.diag[0] = D;
      ev.diag[1] = 0.0;
      ev.diag[2] = D - de - d23;
      ev.diag[3] = D - de;
      break;
    }
    default:
      throw std::invalid_argument("h_rot: unsupported system kind");
  }
  ev.drives = build_drives(seq, ev.beat);
  return ev;
}

}  // namespace

double EnergySpec::delta23() const {
  if (!delta13) throw std::invalid_argument("missing config: delta13_mev");
  return *delta13 - delta12;
}

int LevelSystem::dim() const {
  switch (kind) {
    case SystemKind::ThreeLevel: return 3;
    case SystemKind::FourLevelHot: return 4;
    case SystemKind::FourLevelHigh: return 4;
    case SystemKind::TwoLevelEffective: return 2;
  }
  throw std::logic_error("LevelSystem: bad kind");
}

std::vector<std::string> LevelSystem::labels() const {
  switch (kind) {
    case SystemKind::ThreeLevel: return {"h1", "T+", "h2"};
    case SystemKind::FourLevelHot: return {"h1", "T+", "T+*", "h2"};
    case SystemKind::FourLevelHigh: return {"h1", "T+", "h2", "h3"};
    case SystemKind::TwoLevelEffective: return {"h1", "h2"};
  }
  throw std::logic_error("LevelSystem: bad kind");
}

int LevelSystem::index_of(std::string_view label) const {
  const auto ls = labels();
  for (size_t i = 0; i < ls.size(); ++i)
    if (ls[i] == label) return static_cast<int>(i);
  throw std::invalid_argument("unknown level label: " + std::string(label));
}

int LevelSystem::h2_index() const { return index_of("h2"); }

int LevelSystem::observable_index() const {
  return kind == SystemKind::FourLevelHigh ? index_of("h3") : index_of("h2");
}

double beat_frequency(const LevelSystem& sys, const EnergySpec& e) {
  if (sys.kind == SystemKind::FourLevelHigh)
    return (require(e.delta13, "delta13_mev") + e.small_delta) / kHbar;
  return (e.delta12 + e.small_delta) / kHbar;
}

CMat h_rot(const LevelSystem& sys, const EnergySpec& e, const DipoleSet& d,
           const PulseSequence& seq, double t) {
  CMat h(sys.dim());
  make_rot_eval(sys, e, d, seq)(t, h);
  return h;
}

HamFn make_h_rot_fn(const LevelSystem& sys, const EnergySpec& e,
                    const DipoleSet& d, const PulseSequence& seq) {
  return make_rot_eval(sys, e, d, seq);
}

namespace {

struct LabEval {
  SystemKind kind;
  int dim;
  double omega_p, omega_s;
  double diag[4];
  double mu1, mu2, mu3, mu4;
  std::vector<Drive> drives;

  void operator()(double t, CMat& h) const {
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) h(i, j) = 0.0;
    for (int i = 0; i < dim; ++i) h(i, i) = diag[i];

    const cplx ep(std::cos(omega_p * t), std::sin(omega_p * t));   // e^{+i wp t}
    const cplx es(std::cos(omega_s * t), std::sin(omega_s * t));   // e^{+i ws t}

    for (const auto& d : drives) {
      const double gp = gaussian(t, d.c_pump, d.inv_sig, d.norm_p);
      const double gs = gaussian(t, d.c_stokes, d.inv_sig, d.norm_s);
      // carriers stay at absolute time (chopped-carrier gauge); the pulse's
      // two-photon phase lives in stokes_phase, as in the rotating frame
      const cplx raise_p = 0.5 * gp * ep;
      const cplx raise_s = 0.5 * gs * es * d.stokes_phase;
      const cplx lower_p = 0.5 * gp * std::conj(ep);
      const cplx lower_s = 0.5 * gs * std::conj(es) * std::conj(d.stokes_phase);
      if (kind == SystemKind::ThreeLevel) {
        h(0, 1) += mu1 * (raise_p + raise_s);
        h(1, 2) += mu2 * (lower_p + lower_s);
      } else {
        h(0, 1) += mu1 * (raise_p + raise_s);
        h(0, 2) += mu3 * (raise_p + raise_s);
        h(1, 3) += mu2 * (lower_p + lower_s);
        h(2, 3) += mu4 * (lower_p + lower_s);
      }
    }
    for (int i = 0; i < dim; ++i)
      for (int j = i + 1; j < dim; ++j) h(j, i) = std::conj(h(i, j));
  }
};

void lab_frequencies(const EnergySpec& e, double omega_t, double& omega_p,
                     double& omega_s) {
  // Consistent with the rotating frame above: pump sits at omega_t + Delta/hbar
  // and the beat omega_p - omega_s equals (Delta12 + delta)/hbar.
  omega_p = omega_t + e.big_delta / kHbar;
  omega_s = omega_p - (e.delta12 + e.small_delta) / kHbar;
}

}  // namespace

CMat h_lab(const LevelSystem& sys, const EnergySpec& e, const DipoleSet& d,
           const PulseSequence& seq, double omega_t, double t) {
  CMat h(sys.dim());
  make_h_lab_fn(sys, e, d, seq, omega_t)(t, h);
  return h;
}

HamFn make_h_lab_fn(const LevelSystem& sys, const EnergySpec& e,
                    const DipoleSet& d, const PulseSequence& seq,
                    double omega_t) {
  if (sys.kind != SystemKind::ThreeLevel && sys.kind != SystemKind::FourLevelHot)
    throw std::invalid_argument("h_lab: supported kinds are the three-level and hot-trion systems");
  LabEval ev;
  ev.kind = sys.kind;
  ev.dim = sys.dim();
  lab_frequencies(e, omega_t, ev.omega_p, ev.omega_s);
  ev.mu1 = d.mu1;
  ev.mu2 = d.mu2;
  ev.mu3 = d.mu3;
  ev.mu4 = d.mu4;
  if (sys.kind == SystemKind::ThreeLevel) {
    ev.diag[0] = 0.0;
    ev.diag[1] = omega_t;
    ev.diag[2] = e.delta12 / kHbar;
  } else {
    const double dhot = require(e.delta_hot, "delta_hot_mev") / kHbar;
    ev.diag[0] = 0.0;
    ev.diag[1] = omega_t;
    ev.diag[2] = omega_t + dhot;
    ev.diag[3] = e.delta12 / kHbar;
  }
  ev.drives = build_drives(seq, ev.omega_p - ev.omega_s);
  return ev;
}

CMat u0(const LevelSystem& sys, const EnergySpec& e, double omega_t, double t) {
  if (sys.kind != SystemKind::ThreeLevel && sys.kind != SystemKind::FourLevelHot)
    throw std::invalid_argument("u0: supported kinds are the three-level and hot-trion systems");
  double omega_p, omega_s;
  lab_frequencies(e, omega_t, omega_p, omega_s);
  const int n = sys.dim();
  CMat u(n);
  auto phase = [t](double w) { return cplx(std::cos(w * t), -std::sin(w * t)); };
  if (sys.kind == SystemKind::ThreeLevel) {
    u(0, 0) = phase(omega_t - omega_p);
    u(1, 1) = phase(omega_t);
    u(2, 2) = phase(omega_t - omega_s);
  } else {
    u(0, 0) = phase(omega_t - omega_p);
    u(1, 1) = phase(omega_t);
    u(2, 2) = phase(omega_t);
    u(3, 3) = phase(omega_t - omega_s);
  }
  return u;
}

std::vector<DissipatorSpec> dissipators(const LevelSystem& sys, double gamma1,
                                        double gamma2) {
  if (gamma1 < 0.0 || gamma2 < 0.0)
    throw std::invalid_argument("dissipators: rates must be >= 0");
  const int n = sys.dim();
  const int i1 = sys.index_of("h1");
  const int i2 = sys.h2_index();
  std::vector<DissipatorSpec> out;
  if (gamma1 > 0.0) {
    CMat a1(n);
    a1(i2, i2) = 1.0;  // pure dephasing |h2><h2|
    out.push_back({a1, gamma1});
  }
  if (gamma2 > 0.0) {
    CMat a2(n);
    a2(i1, i2) = 1.0;  // relaxation |h1><h2|
    out.push_back({a2, gamma2});
  }
  return out;
}

EffectiveDrive effective_two_level(const EnergySpec& e, const DipoleSet& d,
                                   const RamanPulse& pulse, double t) {
  const double D = e.big_delta / kHbar;
  const double de = e.small_delta / kHbar;
  const double d12 = e.delta12 / kHbar;

  const double ep = envelope(pulse.pump, t);
  const double es = envelope(pulse.stokes, t);
  const double op1 = d.mu1 * ep;
  const double os1 = d.mu1 * es;
  const double op2 = d.mu2 * ep;
  const double os2 = d.mu2 * es;

  EffectiveDrive out;
  out.omega_eff = op1 * os2 / (2.0 * D);
  // dressed E(h1) - E(h2); each term's sign follows the red/blue detuning of
  // that field from that transition in the rotating frame
  out.detuning_eff = de + op1 * op1 / (4.0 * D) -
                     os1 * os1 / (4.0 * (d12 + de - D)) -
                     os2 * os2 / (4.0 * (D - de)) -
                     op2 * op2 / (4.0 * (d12 + D));

  const double sig = pulse.sigma();
  const double peak_p1 = d.mu1 * pulse.pump.area / (sig * std::sqrt(2.0 * kPi));
  out.validity_warning = peak_p1 > D / 3.0;
  return out;
}

namespace {

struct TwoLevelEval {
  double D, de, d12;
  double mu1, mu2;
  std::vector<Drive> drives;

  void operator()(double t, CMat& h) const {
    double op1_sq = 0.0, os1_sq = 0.0, op2_sq = 0.0, os2_sq = 0.0;
    cplx coupling = 0.0;
    for (const auto& d : drives) {
      const double gp = gaussian(t, d.c_pump, d.inv_sig, d.norm_p);
      const double gs = gaussian(t, d.c_stokes, d.inv_sig, d.norm_s);
      const double op1 = mu1 * gp, os1 = mu1 * gs;
      const double op2 = mu2 * gp, os2 = mu2 * gs;
      op1_sq += op1 * op1;
      os1_sq += os1 * os1;
      op2_sq += op2 * op2;
      os2_sq += os2 * os2;
      // <h1|H_eff|h2> phase is e^{-i psi} (product of the static pump leg and
      // the static Stokes leg)
      coupling += 0.5 * (op1 * os2 / (2.0 * D)) * std::conj(d.stokes_phase);
    }
    const double s1 = op1_sq / (4.0 * D) - os1_sq / (4.0 * (d12 + de - D));
    const double s2 = os2_sq / (4.0 * (D - de)) + op2_sq / (4.0 * (d12 + D));
    h(0, 0) = D + s1;
    h(1, 1) = D - de + s2;
    h(0, 1) = coupling;
    h(1, 0) = std::conj(coupling);
  }
};

}  // namespace

HamFn make_two_level_fn(const EnergySpec& e, const DipoleSet& d,
                        const PulseSequence& seq) {
  TwoLevelEval ev;
  ev.D = e.big_delta / kHbar;
  ev.de = e.small_delta / kHbar;
  ev.d12 = e.delta12 / kHbar;
  ev.mu1 = d.mu1;
  ev.mu2 = d.mu2;
  ev.drives = build_drives(seq, (e.delta12 + e.small_delta) / kHbar);
  return ev;
}

HamFn make_hamiltonian_fn(const LevelSystem& sys, const EnergySpec& e,
                          const DipoleSet& d, const PulseSequence& seq) {
  if (sys.kind == SystemKind::TwoLevelEffective)
    return make_two_level_fn(e, d, seq);
  return make_h_rot_fn(sys, e, d, seq);
}

}  // namespace qraman
