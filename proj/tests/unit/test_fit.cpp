#include <doctest.h>

#include <cmath>
#include <vector>

#include "qraman/constants.hpp"
#include "qraman/fit.hpp"
#include "qraman/pulse.hpp"

using namespace qraman;

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
  return v;
}

void check_recovery(FitModel model, const std::map<std::string, double>& truth,
                    const std::vector<double>& x) {
  std::vector<double> y(x.size());
  for (size_t i = 0; i < x.size(); ++i) y[i] = fit_eval(model, truth, x[i]);
  const FitResult r = fit(model, x, y);
  CHECK(r.converged);
  for (const auto& [k, v] : truth) {
    const double got = r.params.at(k);
    CHECK(std::abs(got - v) <= 1e-6 * std::max(1.0, std::abs(v)));
  }
}

}  // namespace

TEST_CASE("noise-free synthetic recovery for every model") {
  check_recovery(FitModel::gaussian,
                 {{"amp", 0.9}, {"center", 1.7}, {"sigma", 4.2}, {"offset", 0.05}},
                 linspace(-20, 25, 120));
  check_recovery(FitModel::sinusoid,
                 {{"amp", 0.4}, {"freq", 1.042}, {"phase", 0.8}, {"offset", 0.5}},
                 linspace(0, 40, 400));
  check_recovery(FitModel::exp_decay,
                 {{"amp", 0.8}, {"tau", 198.2}, {"offset", 0.02}},
                 linspace(0, 600, 150));
  check_recovery(FitModel::lorentzian,
                 {{"amp", 1.2}, {"center", 1574.72}, {"fwhm", 10.11}, {"offset", 0.1}},
                 linspace(1520, 1630, 200));
  check_recovery(FitModel::saturation, {{"amp", 2.5}, {"p0", 396.0}},
                 linspace(5, 2000, 80));
}

TEST_CASE("saturation fit recovers the saturation power to 0.1%") {
  const std::map<std::string, double> truth{{"amp", 1.0}, {"p0", 396.0}};
  const auto x = linspace(10, 1600, 50);
  std::vector<double> y(x.size());
  for (size_t i = 0; i < x.size(); ++i)
    y[i] = fit_eval(FitModel::saturation, truth, x[i]);
  const FitResult r = fit(FitModel::saturation, x, y);
  CHECK(std::abs(r.params.at("p0") - 396.0) / 396.0 <= 1e-3);
  // half saturation at p = p0
  CHECK(fit_eval(FitModel::saturation, truth, 396.0) == doctest::Approx(0.5));
}

TEST_CASE("exponential fit under 1% noise stays within 3% over 100 trials") {
  const auto x = linspace(0, 400, 400);
  const std::map<std::string, double> truth{
      {"amp", 1.0}, {"tau", 198.0}, {"offset", 0.0}};
  GaussianStream noise(stream_key(2024, 0, 0));
  int within = 0;
  double mean_rel = 0.0, worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> y(x.size());
    for (size_t i = 0; i < x.size(); ++i)
      y[i] = fit_eval(FitModel::exp_decay, truth, x[i]) + 0.01 * noise.next_normal();
    const FitResult r = fit(FitModel::exp_decay, x, y);
    const double rel = std::abs(r.params.at("tau") - 198.0) / 198.0;
    mean_rel += rel / 100.0;
    worst = std::max(worst, rel);
    if (rel <= 0.03) ++within;
  }
  INFO("worst relative tau error: ", worst);
  CHECK(within == 100);
  CHECK(mean_rel <= 0.01);
}

TEST_CASE("degenerate fits stay graceful") {
  const auto x = linspace(0, 10, 40);
  std::vector<double> y(x.size(), 0.7);
  const FitResult r = fit(FitModel::gaussian, x, y);
  CHECK(r.converged);
  CHECK(std::abs(r.params.at("amp")) <= 1e-6);
  CHECK_THROWS_AS(fit(FitModel::gaussian, std::vector<double>{1.0, 2.0},
                      std::vector<double>{1.0, 2.0}),
                  FitError);
}

TEST_CASE("fft spectrum finds a THz tone to 0.5%") {
  const auto x = linspace(0, 100, 2001);  // 0.05 ps steps
  std::vector<double> y(x.size());
  for (size_t i = 0; i < x.size(); ++i)
    y[i] = 0.5 + 0.4 * std::cos(2.0 * kPi * 1.042 * x[i] + 0.3);
  const Spectrum sp = fft_spectrum(x, y);
  CHECK(std::abs(sp.peak_freq - 1.042) / 1.042 <= 5e-3);

  std::vector<double> flat(x.size(), 0.37);
  const Spectrum s0 = fft_spectrum(x, flat);
  CHECK(s0.peak_magnitude <= 1e-10);

  // two well separated tones both appear
  for (size_t i = 0; i < x.size(); ++i)
    y[i] = std::cos(2.0 * kPi * 0.8 * x[i]) + 0.7 * std::cos(2.0 * kPi * 1.3 * x[i]);
  const Spectrum s2 = fft_spectrum(x, y);
  CHECK(std::abs(s2.peak_freq - 0.8) / 0.8 <= 5e-3);
  double second = 0.0, second_mag = 0.0;
  for (size_t k = 1; k + 1 < s2.freq.size(); ++k) {
    if (s2.freq[k] < 1.05) continue;
    if (s2.magnitude[k] > second_mag) {
      second_mag = s2.magnitude[k];
      second = s2.freq[k];
    }
  }
  CHECK(std::abs(second - 1.3) / 1.3 <= 1e-2);
}

TEST_CASE("fft rejects non-uniform sampling") {
  auto x = linspace(0, 10, 64);
  x[30] += 0.02;
  std::vector<double> y(x.size(), 0.0);
  CHECK_THROWS_AS(fft_spectrum(x, y), FitError);
}

TEST_CASE("windowed signal energy matches spectral energy") {
  // Parseval on the raw transform: sum |x|^2 = sum |X|^2 / N
  std::vector<cplx> buf(512);
  GaussianStream g(stream_key(7, 7, 7));
  double etime = 0.0;
  for (auto& v : buf) {
    v = cplx(g.next_normal(), g.next_normal());
    etime += std::norm(v);
  }
  auto spec = buf;
  fft_radix2(spec);
  double efreq = 0.0;
  for (const auto& v : spec) efreq += std::norm(v);
  efreq /= static_cast<double>(buf.size());
  CHECK(std::abs(etime - efreq) / etime <= 1e-9);

  // and the inverse transform returns the signal
  fft_radix2(spec, true);
  double diff = 0.0;
  for (size_t i = 0; i < buf.size(); ++i) diff = std::max(diff, std::abs(spec[i] - buf[i]));
  CHECK(diff <= 1e-12);
}

TEST_CASE("fringe amplitude estimator") {
  const auto x = linspace(10, 20, 200);
  std::vector<double> y(x.size());
  for (size_t i = 0; i < x.size(); ++i)
    y[i] = 0.5 + 0.4 * std::cos(2.0 * kPi * 1.042 * x[i] + 1.1);
  CHECK(std::abs(fringe_amplitude(x, y) - 0.4) <= 1e-3);

  // invariant under a time-axis translation and a phase offset
  auto xs = x;
  for (auto& v : xs) v += 123.456;
  CHECK(std::abs(fringe_amplitude(xs, y) - 0.4) <= 1e-3);

  // noise floor: pure noise reads as a small amplitude
  GaussianStream g(stream_key(9, 9, 9));
  std::vector<double> ny(x.size());
  for (auto& v : ny) v = 0.5 + 0.01 * g.next_normal();
  double amp = 0.0;
  try {
    amp = fringe_amplitude(x, ny);
  } catch (const FitError&) {
    amp = 0.0;  // non-convergence on pure noise is acceptable
  }
  CHECK(amp <= 0.02);
}
