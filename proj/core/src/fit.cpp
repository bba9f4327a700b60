#include "qraman/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "qraman/constants.hpp"

namespace qraman {

namespace {

struct ModelDef {
  std::vector<std::string> names;
  // value and analytic gradient
  double (*value)(const double* p, double x);
  void (*grad)(const double* p, double x, double* g);
};

double gauss_val(const double* p, double x) {
  const double z = (x - p[1]) / p[2];
  return p[0] * std::exp(-0.5 * z * z) + p[3];
}
void gauss_grad(const double* p, double x, double* g) {
  const double z = (x - p[1]) / p[2];
  const double e = std::exp(-0.5 * z * z);
  g[0] = e;
  g[1] = p[0] * e * z / p[2];
  g[2] = p[0] * e * z * z / p[2];
  g[3] = 1.0;
}

double sin_val(const double* p, double x) {
  return p[0] * std::cos(2.0 * kPi * p[1] * x + p[2]) + p[3];
}
void sin_grad(const double* p, double x, double* g) {
  const double a = 2.0 * kPi * p[1] * x + p[2];
  g[0] = std::cos(a);
  g[1] = -p[0] * std::sin(a) * 2.0 * kPi * x;
  g[2] = -p[0] * std::sin(a);
  g[3] = 1.0;
}

double exp_val(const double* p, double x) {
  return p[0] * std::exp(-x / p[1]) + p[2];
}
void exp_grad(const double* p, double x, double* g) {
  const double e = std::exp(-x / p[1]);
  g[0] = e;
  g[1] = p[0] * e * x / (p[1] * p[1]);
  g[2] = 1.0;
}

double lor_val(const double* p, double x) {
  const double hw = 0.5 * p[2];
  const double dx = x - p[1];
  return p[0] * hw * hw / (dx * dx + hw * hw) + p[3];
}
void lor_grad(const double* p, double x, double* g) {
  const double hw = 0.5 * p[2];
  const double dx = x - p[1];
  const double den = dx * dx + hw * hw;
  g[0] = hw * hw / den;
  g[1] = p[0] * hw * hw * 2.0 * dx / (den * den);
  g[2] = p[0] * (hw * dx * dx / (den * den));  // d/dG of (G/2)^2/den
  g[3] = 1.0;
}

double sat_val(const double* p, double x) { return p[0] * x / (p[1] + x); }
void sat_grad(const double* p, double x, double* g) {
  g[0] = x / (p[1] + x);
  g[1] = -p[0] * x / ((p[1] + x) * (p[1] + x));
}

const ModelDef& model_def(FitModel m) {
  static const ModelDef gauss{{"amp", "center", "sigma", "offset"}, gauss_val, gauss_grad};
  static const ModelDef sinus{{"amp", "freq", "phase", "offset"}, sin_val, sin_grad};
  static const ModelDef expd{{"amp", "tau", "offset"}, exp_val, exp_grad};
  static const ModelDef lor{{"amp", "center", "fwhm", "offset"}, lor_val, lor_grad};
  static const ModelDef sat{{"amp", "p0"}, sat_val, sat_grad};
  switch (m) {
    case FitModel::gaussian: return gauss;
    case FitModel::sinusoid: return sinus;
    case FitModel::exp_decay: return expd;
    case FitModel::lorentzian: return lor;
    case FitModel::saturation: return sat;
  }
  throw FitError("unknown fit model");
}

// Solve (A + lambda diag(A)) dx = b for small n; returns false if singular.
bool solve_damped(std::vector<double> a, std::vector<double> b, int n,
                  double lambda, std::vector<double>& dx) {
  for (int i = 0; i < n; ++i) a[i * n + i] *= (1.0 + lambda);
  // Gaussian elimination with partial pivoting
  std::vector<int> piv(n);
  std::iota(piv.begin(), piv.end(), 0);
  for (int col = 0; col < n; ++col) {
    int best = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[best * n + col])) best = r;
    if (std::abs(a[best * n + col]) < 1e-300) return false;
    if (best != col) {
      for (int j = 0; j < n; ++j) std::swap(a[col * n + j], a[best * n + j]);
      std::swap(b[col], b[best]);
    }
    for (int r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / a[col * n + col];
      for (int j = col; j < n; ++j) a[r * n + j] -= f * a[col * n + j];
      b[r] -= f * b[col];
    }
  }
  dx.assign(n, 0.0);
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int j = i + 1; j < n; ++j) s -= a[i * n + j] * dx[j];
    dx[i] = s / a[i * n + i];
  }
  for (double v : dx)
    if (!std::isfinite(v)) return false;
  return true;
}

std::map<std::string, double> auto_init(FitModel model,
                                        std::span<const double> x,
                                        std::span<const double> y);

}  // namespace

double fit_eval(FitModel model, const std::map<std::string, double>& params,
                double x) {
  const auto& def = model_def(model);
  std::vector<double> p;
  for (const auto& n : def.names) p.push_back(params.at(n));
  return def.value(p.data(), x);
}

FitResult fit(FitModel model, std::span<const double> x,
              std::span<const double> y,
              const std::map<std::string, double>& init) {
  const auto& def = model_def(model);
  const int np = static_cast<int>(def.names.size());
  const int m = static_cast<int>(x.size());
  if (y.size() != x.size()) throw FitError("fit: x/y size mismatch");
  if (m < 2 * np) throw FitError("fit: need at least 2x parameters data points");

  auto start = auto_init(model, x, y);
  for (const auto& [k, v] : init) {
    if (!start.count(k)) throw FitError("fit: unknown parameter: " + k);
    if (!std::isfinite(v)) throw FitError("fit: non-finite init for " + k);
    start[k] = v;
  }
  std::vector<double> p;
  for (const auto& n : def.names) p.push_back(start.at(n));

  auto chi2 = [&](const std::vector<double>& q) {
    double s = 0.0;
    for (int i = 0; i < m; ++i) {
      const double r = y[i] - def.value(q.data(), x[i]);
      s += r * r;
    }
    return s;
  };

  double lambda = 1e-3;
  double best = chi2(p);
  FitResult out;
  std::vector<double> jt_r(np), jtj(np * np), g(np), dx;

  int it = 0;
  for (; it < 500; ++it) {
    std::fill(jt_r.begin(), jt_r.end(), 0.0);
    std::fill(jtj.begin(), jtj.end(), 0.0);
    for (int i = 0; i < m; ++i) {
      def.grad(p.data(), x[i], g.data());
      const double r = y[i] - def.value(p.data(), x[i]);
      for (int a = 0; a < np; ++a) {
        jt_r[a] += g[a] * r;
        for (int b = a; b < np; ++b) jtj[a * np + b] += g[a] * g[b];
      }
    }
    for (int a = 0; a < np; ++a)
      for (int b = 0; b < a; ++b) jtj[a * np + b] = jtj[b * np + a];

    double gnorm = 0.0;
    for (double v : jt_r) gnorm = std::max(gnorm, std::abs(v));
    if (gnorm < 1e-12) {
      out.converged = true;
      break;
    }

    bool stepped = false;
    for (int tries = 0; tries < 60; ++tries) {
      if (!solve_damped(jtj, jt_r, np, lambda, dx)) {
        lambda *= 10.0;
        if (lambda > 1e12) {
          out.message = "singular normal matrix: damping escalation failed";
          break;
        }
        continue;
      }
      std::vector<double> q(np);
      for (int a = 0; a < np; ++a) q[a] = p[a] + dx[a];
      const double c = chi2(q);
      if (std::isfinite(c) && c <= best) {
        double relchange = 0.0;
        for (int a = 0; a < np; ++a)
          relchange = std::max(relchange,
                               std::abs(dx[a]) / std::max(1e-30, std::abs(q[a])));
        p = std::move(q);
        best = c;
        lambda = std::max(lambda / 3.0, 1e-12);
        stepped = true;
        if (relchange < 1e-10) out.converged = true;
        break;
      }
      lambda *= 10.0;
      if (lambda > 1e12) {
        out.message = "damping escalation failed";
        break;
      }
    }
    if (!stepped || out.converged) break;
  }

  out.iterations = it + 1;
  out.residual_norm = std::sqrt(best);
  for (int a = 0; a < np; ++a) out.params[def.names[a]] = p[a];

  // canonical sinusoid form: amp >= 0, phase in (-pi, pi]
  if (model == FitModel::sinusoid) {
    double& amp = out.params["amp"];
    double& ph = out.params["phase"];
    if (amp < 0.0) {
      amp = -amp;
      ph += kPi;
    }
    ph = std::remainder(ph, 2.0 * kPi);
  }

  // uncertainties from the linearized normal equations at the solution
  {
    std::fill(jtj.begin(), jtj.end(), 0.0);
    std::vector<double> pv;
    for (const auto& n : def.names) pv.push_back(out.params.at(n));
    for (int i = 0; i < m; ++i) {
      def.grad(pv.data(), x[i], g.data());
      for (int a = 0; a < np; ++a)
        for (int b = a; b < np; ++b) jtj[a * np + b] += g[a] * g[b];
    }
    for (int a = 0; a < np; ++a)
      for (int b = 0; b < a; ++b) jtj[a * np + b] = jtj[b * np + a];
    const double dof = std::max(1, m - np);
    const double s2 = best / dof;
    // invert via solves against unit vectors
    for (int a = 0; a < np; ++a) {
      std::vector<double> eb(np, 0.0);
      eb[a] = 1.0;
      std::vector<double> col;
      if (solve_damped(jtj, eb, np, 0.0, col) && col[a] > 0.0)
        out.uncertainties[def.names[a]] = std::sqrt(col[a] * s2);
      else
        out.uncertainties[def.names[a]] = std::numeric_limits<double>::quiet_NaN();
    }
  }

  return out;
}

void fft_radix2(std::vector<cplx>& a, bool inverse) {
  const size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0)
    throw FitError("fft_radix2: length must be a power of two");
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = 2.0 * kPi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
    const cplx wl(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      cplx w(1.0);
      for (size_t j = 0; j < len / 2; ++j) {
        const cplx u = a[i + j];
        const cplx v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wl;
      }
    }
  }
  if (inverse)
    for (auto& v : a) v /= static_cast<double>(n);
}

Spectrum fft_spectrum(std::span<const double> x, std::span<const double> y) {
  const size_t n = x.size();
  if (n < 8) throw FitError("fft_spectrum: need at least 8 samples");
  if (y.size() != n) throw FitError("fft_spectrum: x/y size mismatch");
  const double dt = (x[n - 1] - x[0]) / static_cast<double>(n - 1);
  if (!(dt > 0.0)) throw FitError("fft_spectrum: x must be increasing");
  for (size_t i = 1; i < n; ++i)
    if (std::abs((x[i] - x[i - 1]) - dt) > 1e-6 * dt)
      throw FitError("fft_spectrum: non-uniform sampling detected");

  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
  size_t nfft = 1;
  while (nfft < 4 * n) nfft <<= 1;
  std::vector<cplx> buf(nfft, cplx(0.0));
  for (size_t i = 0; i < n; ++i) {
    const double w = 0.5 * (1.0 - std::cos(2.0 * kPi * i / (n - 1)));
    buf[i] = (y[i] - mean) * w;
  }
  fft_radix2(buf);

  Spectrum sp;
  const size_t half = nfft / 2;
  sp.freq.resize(half + 1);
  sp.magnitude.resize(half + 1);
  const double df = 1.0 / (static_cast<double>(nfft) * dt);
  for (size_t k = 0; k <= half; ++k) {
    sp.freq[k] = df * static_cast<double>(k);
    sp.magnitude[k] = std::abs(buf[k]);
  }

  size_t pk = 1;
  for (size_t k = 1; k <= half; ++k)
    if (sp.magnitude[k] > sp.magnitude[pk]) pk = k;
  sp.peak_magnitude = sp.magnitude[pk];
  sp.peak_freq = sp.freq[pk];
  if (pk > 0 && pk < half) {
    const double ym = sp.magnitude[pk - 1];
    const double y0 = sp.magnitude[pk];
    const double yp = sp.magnitude[pk + 1];
    const double den = ym - 2.0 * y0 + yp;
    if (std::abs(den) > 1e-300) {
      const double delta = 0.5 * (ym - yp) / den;
      sp.peak_freq = (static_cast<double>(pk) + delta) * df;
    }
  }
  return sp;
}

double fringe_amplitude(std::span<const double> x, std::span<const double> y) {
  const Spectrum sp = fft_spectrum(x, y);
  std::map<std::string, double> init{{"freq", sp.peak_freq}};
  FitResult r = fit(FitModel::sinusoid, x, y, init);
  if (!r.converged) throw FitError("fringe_amplitude: sinusoid fit did not converge");
  return std::abs(r.params.at("amp"));
}

namespace {

std::map<std::string, double> auto_init(FitModel model,
                                        std::span<const double> x,
                                        std::span<const double> y) {
  const size_t n = x.size();
  const double ymin = *std::min_element(y.begin(), y.end());
  const double ymax = *std::max_element(y.begin(), y.end());
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / n;

  switch (model) {
    case FitModel::gaussian: {
      size_t imax = 0;
      for (size_t i = 0; i < n; ++i)
        if (y[i] > y[imax]) imax = i;
      // width from the second moment of (y - min)
      double w = 0.0, norm = 0.0;
      for (size_t i = 0; i < n; ++i) {
        const double yy = y[i] - ymin;
        w += yy * (x[i] - x[imax]) * (x[i] - x[imax]);
        norm += yy;
      }
      double sigma = norm > 0.0 ? std::sqrt(std::max(w / norm, 1e-12)) : 1.0;
      return {{"amp", ymax - ymin}, {"center", x[imax]}, {"sigma", sigma},
              {"offset", ymin}};
    }
    case FitModel::sinusoid: {
      double freq = 1.0;
      try {
        freq = std::max(fft_spectrum(x, y).peak_freq, 1e-12);
      } catch (const FitError&) {
      }
      // quadrature projection at the FFT frequency for the starting phase
      double cs = 0.0, sn = 0.0;
      for (size_t i = 0; i < n; ++i) {
        cs += (y[i] - mean) * std::cos(2.0 * kPi * freq * x[i]);
        sn += (y[i] - mean) * std::sin(2.0 * kPi * freq * x[i]);
      }
      return {{"amp", 0.5 * (ymax - ymin)}, {"freq", freq},
              {"phase", std::atan2(-sn, cs)}, {"offset", mean}};
    }
    case FitModel::exp_decay: {
      const double offset = ymin;
      // log-linear regression on the positive part
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      int cnt = 0;
      for (size_t i = 0; i < n; ++i) {
        const double v = y[i] - offset;
        if (v > 1e-12) {
          const double ly = std::log(v);
          sx += x[i];
          sy += ly;
          sxx += x[i] * x[i];
          sxy += x[i] * ly;
          ++cnt;
        }
      }
      double tau = 1.0, amp = ymax - ymin;
      if (cnt >= 2) {
        const double den = cnt * sxx - sx * sx;
        if (std::abs(den) > 1e-300) {
          const double slope = (cnt * sxy - sx * sy) / den;
          const double icpt = (sy - slope * sx) / cnt;
          if (slope < -1e-300) {
            tau = -1.0 / slope;
            amp = std::exp(icpt);
          }
        }
      }
      return {{"amp", amp}, {"tau", tau}, {"offset", offset}};
    }
    case FitModel::lorentzian: {
      size_t imax = 0;
      for (size_t i = 0; i < n; ++i)
        if (y[i] > y[imax]) imax = i;
      const double half = ymin + 0.5 * (ymax - ymin);
      double lo = x.front(), hi = x.back();
      for (size_t i = imax; i-- > 0;)
        if (y[i] < half) { lo = x[i]; break; }
      for (size_t i = imax; i < n; ++i)
        if (y[i] < half) { hi = x[i]; break; }
      return {{"amp", ymax - ymin}, {"center", x[imax]},
              {"fwhm", std::max(hi - lo, 1e-9)}, {"offset", ymin}};
    }
    case FitModel::saturation: {
      const double amp = ymax * 1.2 + 1e-12;
      double p0 = x.back() * 0.5 + 1e-12;
      for (size_t i = 0; i < n; ++i)
        if (y[i] > 0.5 * amp) { p0 = std::max(x[i], 1e-12); break; }
      return {{"amp", amp}, {"p0", p0}};
    }
  }
  throw FitError("unknown fit model");
}

}  // namespace

}  // namespace qraman
