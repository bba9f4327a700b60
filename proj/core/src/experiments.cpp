#include "qraman/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "qraman/constants.hpp"
#include "qraman/fit.hpp"
#include "qraman/parallel.hpp"

namespace qraman {

double Axis::value(int i) const {
  if (count == 1) return lo;
  return lo + (hi - lo) * static_cast<double>(i) / (count - 1);
}

void Axis::validate() const {
  if (count < 1) throw std::invalid_argument("Axis " + name + ": count must be >= 1");
  if (!std::isfinite(lo) || !std::isfinite(hi))
    throw std::invalid_argument("Axis " + name + ": bounds must be finite");
  if (count > 1 && !(hi > lo))
    throw std::invalid_argument("Axis " + name + ": hi must exceed lo");
}

std::size_t SweepTable::index(int i, int j) const {
  if (axes.size() == 1) return static_cast<std::size_t>(i);
  return static_cast<std::size_t>(i) * axes[1].count + j;
}

double SweepTable::max_value() const {
  return *std::max_element(values.begin(), values.end());
}

std::pair<double, double> SweepTable::argmax() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  if (axes.size() == 1) return {axes[0].value(static_cast<int>(best)), 0.0};
  const int i = static_cast<int>(best) / axes[1].count;
  const int j = static_cast<int>(best) % axes[1].count;
  return {axes[0].value(i), axes[1].value(j)};
}

void SweepTable::write_csv(std::ostream& os) const {
  for (const auto& ax : axes) os << ax.name << ',';
  os << observable << '\n';
  char buf[64];
  auto put = [&](double v, char sep) {
    std::snprintf(buf, sizeof buf, "%.9f%c", v, sep);
    os << buf;
  };
  if (axes.size() == 1) {
    for (int i = 0; i < axes[0].count; ++i) {
      put(axes[0].value(i) / axes[0].display_scale, ',');
      put(values[index(i)], '\n');
    }
  } else {
    for (int i = 0; i < axes[0].count; ++i)
      for (int j = 0; j < axes[1].count; ++j) {
        put(axes[0].value(i) / axes[0].display_scale, ',');
        put(axes[1].value(j) / axes[1].display_scale, ',');
        put(values[index(i, j)], '\n');
      }
  }
}

double target_mu(const ExperimentConfig& cfg) {
  if (cfg.system.kind == SystemKind::FourLevelHigh) {
    if (!cfg.dipoles.mu5) throw std::invalid_argument("missing config: mu5");
    return *cfg.dipoles.mu5;
  }
  return cfg.dipoles.mu2;
}

RamanPulse make_raman_pulse(const ExperimentConfig& cfg, double center,
                            double theta_s_target, double phase) {
  return RamanPulse::make(center, cfg.fwhm_ps, cfg.pump_area,
                          theta_s_target / target_mu(cfg), phase);
}

IntegratorConfig effective_integrator(const ExperimentConfig& cfg) {
  IntegratorConfig ic = cfg.integrator;
  const double sig = sigma_from_fwhm(cfg.fwhm_ps);
  ic.max_step = std::min(ic.max_step, sig / 20.0);
  return ic;
}

namespace {

PulseSequence maybe_perturb(const ExperimentConfig& cfg, PulseSequence seq,
                            std::uint64_t point_index) {
  if (cfg.active_noise) {
    const auto& an = *cfg.active_noise;
    return perturb(seq, an.spec,
                   an.sample_index * an.stride + point_index);
  }
  return seq;
}

SimResult run_impl(const ExperimentConfig& cfg, const PulseSequence& seq0,
                   std::vector<double> sample_times, std::uint64_t point_index) {
  const PulseSequence seq = maybe_perturb(cfg, seq0, point_index);
  const HamFn ham = make_hamiltonian_fn(cfg.system, cfg.energies, cfg.dipoles, seq);
  const auto diss = dissipators(cfg.system, cfg.gamma1, cfg.gamma2);
  IntegratorConfig ic = effective_integrator(cfg);
  ic.sample_times = std::move(sample_times);
  const int dim = cfg.system.dim();
  const DensityMatrix rho0 = basis_state(dim, cfg.system.index_of("h1"));
  SimResult r = evolve(ham, dim, diss, rho0, seq.t_start, seq.t_end, ic,
                       cfg.system.index_of("h1"), cfg.system.h2_index());
  r.labels = cfg.system.labels();
  return r;
}

std::string format_hash(const ExperimentConfig& cfg) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%d|%.12g|%.12g|%.12g|%.12g|%.12g|%.12g|%.12g|%.12g|%.12g|%.12g",
                static_cast<int>(cfg.system.kind), cfg.energies.delta12,
                cfg.energies.big_delta, cfg.energies.small_delta,
                cfg.energies.delta_hot.value_or(-1.0),
                cfg.energies.delta13.value_or(-1.0), cfg.dipoles.mu2,
                cfg.dipoles.mu4, cfg.dipoles.mu5.value_or(-1.0), cfg.fwhm_ps,
                cfg.pump_area);
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (const char* p = buf; *p; ++p) {
    h ^= static_cast<unsigned char>(*p);
    h *= 0x100000001B3ull;
  }
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void stamp(SweepTable& t, const ExperimentConfig& cfg) {
  t.metadata["config_hash"] = format_hash(cfg);
  t.metadata["seed"] = std::to_string(cfg.seed);
}

}  // namespace

double run_sequence(const ExperimentConfig& cfg, const PulseSequence& seq,
                    std::uint64_t point_index) {
  SimResult r = run_impl(cfg, seq, {}, point_index);
  return r.populations[cfg.system.observable_index()].back();
}

SimResult run_sequence_trace(const ExperimentConfig& cfg,
                             const PulseSequence& seq,
                             std::vector<double> sample_times,
                             std::uint64_t point_index) {
  return run_impl(cfg, seq, std::move(sample_times), point_index);
}

SweepTable rabi_sweep(const ExperimentConfig& cfg, const Axis& stokes_area_axis) {
  stokes_area_axis.validate();
  SweepTable t;
  t.axes = {stokes_area_axis};
  t.values.assign(stokes_area_axis.count, 0.0);
  parallel_for(stokes_area_axis.count, [&](std::size_t i) {
    const double theta_s = stokes_area_axis.value(static_cast<int>(i));
    const auto pulse = make_raman_pulse(cfg, 0.0, theta_s, cfg.phase);
    const auto seq = PulseSequence::over({pulse}, cfg.window_sigmas);
    t.values[i] = run_sequence(cfg, seq, i);
  });
  stamp(t, cfg);
  return t;
}

SweepTable detuning_area_map(const ExperimentConfig& cfg, const Axis& delta_axis,
                             const Axis& stokes_area_axis) {
  delta_axis.validate();
  stokes_area_axis.validate();
  SweepTable t;
  t.axes = {delta_axis, stokes_area_axis};
  t.values.assign(static_cast<std::size_t>(delta_axis.count) *
                      stokes_area_axis.count,
                  0.0);
  parallel_for(t.values.size(), [&](std::size_t idx) {
    const int i = static_cast<int>(idx) / stokes_area_axis.count;
    const int j = static_cast<int>(idx) % stokes_area_axis.count;
    ExperimentConfig c = cfg;
    c.energies.small_delta = delta_axis.value(i);
    const auto pulse = make_raman_pulse(c, 0.0, stokes_area_axis.value(j), c.phase);
    const auto seq = PulseSequence::over({pulse}, c.window_sigmas);
    t.values[idx] = run_sequence(c, seq, idx);
  });
  stamp(t, cfg);
  return t;
}

SweepTable delay_scan(const ExperimentConfig& cfg, const Axis& delay_axis) {
  delay_axis.validate();
  SweepTable t;
  t.axes = {delay_axis};
  t.values.assign(delay_axis.count, 0.0);
  parallel_for(delay_axis.count, [&](std::size_t i) {
    auto pulse =
        make_raman_pulse(cfg, 0.0, cfg.stokes_area_target, cfg.phase);
    pulse.set_pump_stokes_delay(delay_axis.value(static_cast<int>(i)));
    const auto seq = PulseSequence::over({pulse}, cfg.window_sigmas);
    t.values[i] = run_sequence(cfg, seq, i);
  });
  stamp(t, cfg);
  return t;
}

SweepTable ramsey_scan(const ExperimentConfig& cfg, const Axis& interval_axis,
                       std::span<const double> phase_values) {
  interval_axis.validate();
  if (phase_values.empty())
    throw std::invalid_argument("ramsey_scan: phase_values must be non-empty");
  Axis phase_axis{"phase_rad", phase_values.front(), phase_values.back(),
                  static_cast<int>(phase_values.size()), 1.0};
  SweepTable t;
  t.axes = {interval_axis, phase_axis};
  t.values.assign(static_cast<std::size_t>(interval_axis.count) *
                      phase_values.size(),
                  0.0);
  const int np = static_cast<int>(phase_values.size());
  parallel_for(t.values.size(), [&](std::size_t idx) {
    const int i = static_cast<int>(idx) / np;
    const int j = static_cast<int>(idx) % np;
    const double dt = interval_axis.value(i);
    const auto control =
        make_raman_pulse(cfg, 0.0, cfg.stokes_area_target, phase_values[j]);
    const auto probe = make_raman_pulse(cfg, dt, cfg.stokes_area_target, 0.0);
    const auto seq = PulseSequence::over({control, probe}, cfg.window_sigmas);
    t.values[idx] = run_sequence(cfg, seq, idx);
  });
  stamp(t, cfg);
  return t;
}

std::vector<FringePoint> coherence_decay_scan(
    const ExperimentConfig& cfg, std::span<const double> coarse_intervals) {
  if (coarse_intervals.empty())
    throw std::invalid_argument("coherence_decay_scan: no intervals");
  // local fine scan spanning ~3.3 fringe periods around each coarse interval
  const double period = 1.0 / fringe_frequency(cfg);
  const int nfine = 40;
  const double span = 3.3 * period;

  std::vector<FringePoint> out(coarse_intervals.size());
  const std::size_t total = coarse_intervals.size() * nfine;
  std::vector<double> values(total, 0.0);
  parallel_for(total, [&](std::size_t idx) {
    const std::size_t ci = idx / nfine;
    const int k = static_cast<int>(idx % nfine);
    const double dt = coarse_intervals[ci] + span * k / (nfine - 1);
    const auto control =
        make_raman_pulse(cfg, 0.0, cfg.stokes_area_target, cfg.phase);
    const auto probe = make_raman_pulse(cfg, dt, cfg.stokes_area_target, 0.0);
    const auto seq = PulseSequence::over({control, probe}, cfg.window_sigmas);
    values[idx] = run_sequence(cfg, seq, idx);
  });

  for (std::size_t ci = 0; ci < coarse_intervals.size(); ++ci) {
    std::vector<double> xs(nfine), ys(nfine);
    for (int k = 0; k < nfine; ++k) {
      xs[k] = coarse_intervals[ci] + span * k / (nfine - 1);
      ys[k] = values[ci * nfine + k];
    }
    out[ci].interval = coarse_intervals[ci];
    try {
      out[ci].amplitude = fringe_amplitude(xs, ys);
      out[ci].converged = true;
    } catch (const FitError&) {
      out[ci].amplitude = 0.0;
      out[ci].converged = false;
    }
  }
  return out;
}

double half_transfer_area(const ExperimentConfig& cfg, double pi_area) {
  auto transfer = [&](double a) {
    const auto pulse = make_raman_pulse(cfg, 0.0, a, cfg.phase);
    const auto seq = PulseSequence::over({pulse}, cfg.window_sigmas);
    return run_sequence(cfg, seq, 0);
  };
  double lo = 0.05 * pi_area, hi = pi_area;
  if (transfer(hi) < 0.5)
    throw std::invalid_argument(
        "half_transfer_area: transfer never reaches 0.5 on the rising branch");
  for (int it = 0; it < 50 && (hi - lo) > 1e-4; ++it) {
    const double mid = 0.5 * (lo + hi);
    (transfer(mid) < 0.5 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

SweepTable phase_area_map(const ExperimentConfig& cfg, const Axis& theta_axis,
                          const Axis& phase_axis, double fixed_interval) {
  theta_axis.validate();
  phase_axis.validate();
  if (!(fixed_interval > 0.0))
    throw std::invalid_argument("phase_area_map: fixed_interval must be > 0");
  // the probe is a transfer-calibrated pi/2: a lone probe moves half the
  // population, which anchors the Theta = 0 column at 0.5
  const double probe_area = half_transfer_area(cfg, cfg.stokes_area_target);
  SweepTable t;
  t.axes = {theta_axis, phase_axis};
  t.values.assign(static_cast<std::size_t>(theta_axis.count) * phase_axis.count,
                  0.0);
  parallel_for(t.values.size(), [&](std::size_t idx) {
    const int i = static_cast<int>(idx) / phase_axis.count;
    const int j = static_cast<int>(idx) % phase_axis.count;
    const double theta = theta_axis.value(i);
    const double phi = phase_axis.value(j);
    // control area scales linearly with the target rotation angle
    const double ctrl_area = cfg.stokes_area_target * theta / kPi;
    const auto control = make_raman_pulse(cfg, 0.0, ctrl_area, phi);
    const auto probe = make_raman_pulse(cfg, fixed_interval, probe_area, 0.0);
    const auto seq = PulseSequence::over({control, probe}, cfg.window_sigmas);
    t.values[idx] = run_sequence(cfg, seq, idx);
  });
  t.metadata["probe_area_rad"] = std::to_string(probe_area);
  stamp(t, cfg);
  return t;
}

SweepTable t1_probe(const ExperimentConfig& cfg, const Axis& interval_axis) {
  interval_axis.validate();
  const auto prep = make_raman_pulse(cfg, 0.0, cfg.stokes_area_target, cfg.phase);
  auto seq = PulseSequence::over({prep}, cfg.window_sigmas);
  std::vector<double> samples(interval_axis.count);
  for (int i = 0; i < interval_axis.count; ++i) samples[i] = interval_axis.value(i);
  if (samples.front() < seq.t_start)
    throw std::invalid_argument("t1_probe: intervals must start after the pulse window opens");
  seq.t_end = std::max(seq.t_end, samples.back());
  SimResult r = run_impl(cfg, seq, samples, 0);

  SweepTable t;
  t.axes = {interval_axis};
  t.values.assign(interval_axis.count, 0.0);
  const int obs = cfg.system.observable_index();
  for (int i = 0; i < interval_axis.count; ++i)
    t.values[i] = r.populations[obs][i];
  stamp(t, cfg);
  return t;
}

SweepTable high_orbital_map(const ExperimentConfig& cfg, const Axis& delta_axis,
                            const Axis& stokes_area_axis) {
  if (cfg.system.kind != SystemKind::FourLevelHigh)
    throw std::invalid_argument("high_orbital_map: system must be four-level-high");
  SweepTable t = detuning_area_map(cfg, delta_axis, stokes_area_axis);
  t.observable = "c_h3";
  return t;
}

SweepTable noise_monte_carlo(
    const ExperimentConfig& cfg,
    const std::function<SweepTable(const ExperimentConfig&)>& inner,
    int n_samples) {
  if (n_samples < 1)
    throw std::invalid_argument("noise_monte_carlo: n_samples must be >= 1");
  if (!cfg.noise)
    throw std::invalid_argument("noise_monte_carlo: config has no noise block");

  SweepTable acc;
  for (int s = 0; s < n_samples; ++s) {
    ExperimentConfig c = cfg;
    NoiseSpec ns = *cfg.noise;
    ns.seed = cfg.seed;
    c.active_noise = ExperimentConfig::ActiveNoise{ns, static_cast<std::uint64_t>(s), 1u << 24};
    SweepTable t = inner(c);
    if (s == 0) {
      acc = std::move(t);
    } else {
      if (t.values.size() != acc.values.size())
        throw std::logic_error("noise_monte_carlo: inner table size changed");
      for (std::size_t i = 0; i < acc.values.size(); ++i)
        acc.values[i] += t.values[i];
    }
  }
  for (auto& v : acc.values) v /= n_samples;
  acc.metadata["n_samples"] = std::to_string(n_samples);
  acc.metadata["seed"] = std::to_string(cfg.seed);
  return acc;
}

double readout_signal(double c_h2, double p_cw, double p0) {
  if (p_cw < 0.0 || p0 < 0.0)
    throw std::invalid_argument("readout_signal: powers must be >= 0");
  if (p_cw == 0.0) return 0.0;
  return c_h2 * p_cw / (p0 + p_cw);
}

double pi_area_at_delta(const ExperimentConfig& cfg, double area_lo,
                        double area_hi, int grid) {
  if (grid < 5) throw std::invalid_argument("pi_area_at_delta: grid too coarse");
  std::vector<double> areas(grid), vals(grid, 0.0);
  for (int i = 0; i < grid; ++i)
    areas[i] = area_lo + (area_hi - area_lo) * i / (grid - 1);
  parallel_for(grid, [&](std::size_t i) {
    const auto pulse = make_raman_pulse(cfg, 0.0, areas[i], cfg.phase);
    const auto seq = PulseSequence::over({pulse}, cfg.window_sigmas);
    vals[i] = run_sequence(cfg, seq, i);
  });
  // first local maximum on the grid
  int im = grid - 1;
  for (int i = 1; i + 1 < grid; ++i) {
    if (vals[i] >= vals[i - 1] && vals[i] >= vals[i + 1] && vals[i] > 0.05) {
      im = i;
      break;
    }
  }
  double lo = areas[std::max(0, im - 1)];
  double hi = areas[std::min(grid - 1, im + 1)];
  auto f = [&](double a) {
    const auto pulse = make_raman_pulse(cfg, 0.0, a, cfg.phase);
    const auto seq = PulseSequence::over({pulse}, cfg.window_sigmas);
    return run_sequence(cfg, seq, 0);
  };
  // golden-section maximization
  const double gr = 0.6180339887498949;
  double x1 = hi - gr * (hi - lo);
  double x2 = lo + gr * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 40 && (hi - lo) > 1e-4; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = f(x1);
    }
  }
  return 0.5 * (lo + hi);
}

double fringe_frequency(const ExperimentConfig& cfg) {
  if (cfg.system.kind == SystemKind::FourLevelHigh) {
    if (!cfg.energies.delta13)
      throw std::invalid_argument("missing config: delta13_mev");
    return *cfg.energies.delta13 / kPlanck;
  }
  return cfg.energies.delta12 / kPlanck;
}

}  // namespace qraman
