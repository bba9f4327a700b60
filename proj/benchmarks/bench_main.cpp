#include <benchmark/benchmark.h>

#include "qraman/calibrate.hpp"
#include "qraman/constants.hpp"
#include "qraman/evolve.hpp"
#include "qraman/experiments.hpp"
#include "qraman/fit.hpp"

namespace {

using namespace qraman;

ExperimentConfig bench_cfg(SystemKind kind) {
  ExperimentConfig cfg;
  cfg.system.kind = kind;
  if (kind == SystemKind::FourLevelHot) cfg.energies.delta_hot = 3.5;
  cfg.energies.small_delta = 0.25;
  cfg.stokes_area_target = 2.0 * kPi;
  return cfg;
}

void BM_hamiltonian_eval(benchmark::State& state) {
  const auto cfg = bench_cfg(SystemKind::FourLevelHot);
  const auto pulse = make_raman_pulse(cfg, 0.0, cfg.stokes_area_target, 0.3);
  const auto seq = PulseSequence::over({pulse}, 6.0);
  const HamFn ham = make_h_rot_fn(cfg.system, cfg.energies, cfg.dipoles, seq);
  CMat h(4);
  double t = -10.0;
  for (auto _ : state) {
    ham(t, h);
    benchmark::DoNotOptimize(h(0, 1));
    t += 1e-4;
  }
}
BENCHMARK(BM_hamiltonian_eval);

void BM_evolve_pulse(benchmark::State& state) {
  const auto kind = state.range(0) == 3 ? SystemKind::ThreeLevel
                                        : SystemKind::FourLevelHot;
  const auto cfg = bench_cfg(kind);
  const auto pulse = make_raman_pulse(cfg, 0.0, cfg.stokes_area_target, 0.0);
  const auto seq = PulseSequence::over({pulse}, 6.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_sequence(cfg, seq, 0));
  }
}
BENCHMARK(BM_evolve_pulse)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_evolve_dissipative(benchmark::State& state) {
  auto cfg = bench_cfg(SystemKind::ThreeLevel);
  cfg.gamma1 = 1.0 / 263.0;
  cfg.gamma2 = 1.0 / 159.0;
  const auto control = make_raman_pulse(cfg, 0.0, kPi, 0.0);
  const auto probe = make_raman_pulse(cfg, 40.0, kPi, 0.0);
  const auto seq = PulseSequence::over({control, probe}, 6.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_sequence(cfg, seq, 0));
  }
}
BENCHMARK(BM_evolve_dissipative)->Unit(benchmark::kMillisecond);

void BM_sinusoid_fit(benchmark::State& state) {
  std::vector<double> x(200), y(200);
  for (int i = 0; i < 200; ++i) {
    x[i] = 0.08 * i;
    y[i] = 0.5 + 0.3 * std::cos(2.0 * kPi * 1.042 * x[i] + 0.7);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit(FitModel::sinusoid, x, y).residual_norm);
  }
}
BENCHMARK(BM_sinusoid_fit)->Unit(benchmark::kMicrosecond);

void BM_fft_spectrum(benchmark::State& state) {
  std::vector<double> x(1000), y(1000);
  for (int i = 0; i < 1000; ++i) {
    x[i] = 0.05 * i;
    y[i] = 0.5 + 0.3 * std::cos(2.0 * kPi * 1.042 * x[i]);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(fft_spectrum(x, y).peak_freq);
  }
}
BENCHMARK(BM_fft_spectrum)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
