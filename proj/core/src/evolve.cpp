#include "qraman/evolve.hpp"

#include <algorithm>
#include <cmath>

namespace qraman {

namespace {

// Dormand-Prince 5(4) tableau
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// b(5th) - b(4th)
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// dense-output weights
constexpr double d1 = -12715105075.0 / 11282082432.0;
constexpr double d3 = 87487479700.0 / 32700410799.0;
constexpr double d4 = -10690763975.0 / 1880347072.0;
constexpr double d5 = 701980252875.0 / 199316789632.0;
constexpr double d6 = -1453857185.0 / 822651844.0;
constexpr double d7 = 69997945.0 / 29380423.0;

struct Dissipator {
  CMat a;
  CMat adag;
  CMat ada;
  double half_rate;
};

struct Rhs {
  const HamFn* ham;
  std::vector<Dissipator> diss;
  int dim;

  void operator()(double t, const CMat& rho, CMat& out, CMat& hbuf) const {
    (*ham)(t, hbuf);
    out = commutator(hbuf, rho);
    out *= cplx(0.0, -1.0);
    for (const auto& d : diss) {
      CMat l = 2.0 * ((d.a * rho) * d.adag);
      l -= d.ada * rho;
      l -= rho * d.ada;
      l *= cplx(d.half_rate, 0.0);
      out += l;
    }
  }
};

double error_norm(const CMat& err, const CMat& y0, const CMat& y1, int dim,
                  double atol, double rtol) {
  double s = 0.0;
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) {
      const double sc =
          atol + rtol * std::max(std::abs(y0(i, j)), std::abs(y1(i, j)));
      const double e = std::abs(err(i, j)) / sc;
      s += e * e;
    }
  return std::sqrt(s / (dim * dim));
}

}  // namespace

SimResult evolve(const HamFn& hamiltonian, int dim,
                 std::span<const DissipatorSpec> dissipators,
                 const DensityMatrix& rho0, double t_begin, double t_end,
                 const IntegratorConfig& cfg, int coh_i, int coh_j) {
  if (!(cfg.rel_tol > 0.0) || !(cfg.abs_tol > 0.0) || !(cfg.max_step > 0.0))
    throw std::invalid_argument("IntegratorConfig: tolerances and max_step must be > 0");
  if (!(t_end > t_begin))
    throw std::invalid_argument("evolve: t_end must exceed t_begin");
  if (rho0.matrix.dim() != dim)
    throw std::invalid_argument("evolve: rho0 dimension mismatch");
  {
    const DensityReport rep = validate_density(rho0);
    if (!density_ok(rep, std::max(rho0.tolerance, 1e-9)))
      throw std::invalid_argument("evolve: rho0 is not a valid density matrix");
  }
  if (coh_j < 0) coh_j = dim - 1;

  std::vector<double> samples = cfg.sample_times;
  if (samples.empty()) samples.push_back(t_end);
  for (size_t i = 0; i < samples.size(); ++i) {
    if (samples[i] < t_begin - 1e-12 || samples[i] > t_end + 1e-12)
      throw std::invalid_argument("evolve: sample time outside the window");
    if (i > 0 && samples[i] < samples[i - 1])
      throw std::invalid_argument("evolve: sample times must be ordered");
  }

  Rhs rhs;
  rhs.ham = &hamiltonian;
  rhs.dim = dim;
  for (const auto& d : dissipators) {
    if (d.rate < 0.0) throw std::invalid_argument("evolve: negative dissipator rate");
    if (d.op.dim() != dim) throw std::invalid_argument("evolve: dissipator dimension mismatch");
    if (d.rate == 0.0) continue;
    Dissipator dd;
    dd.a = d.op;
    dd.adag = d.op.adjoint();
    dd.ada = dd.adag * dd.a;
    dd.half_rate = 0.5 * d.rate;
    rhs.diss.push_back(std::move(dd));
  }

  SimResult res;
  res.times = samples;
  res.populations.assign(dim, std::vector<double>(samples.size(), 0.0));
  res.coherence_h1h2.assign(samples.size(), cplx(0.0));

  CMat y = rho0.matrix;
  y.hermitize();
  CMat hbuf(dim);
  CMat k1(dim), k2(dim), k3(dim), k4(dim), k5(dim), k6(dim), k7(dim);
  CMat ytmp(dim), y1(dim), err(dim);

  double t = t_begin;
  double h = std::min(cfg.max_step, (t_end - t_begin) * 0.25);
  double err_prev = 1.0;
  bool first = true;
  bool rejected_last = false;
  size_t next_sample = 0;

  auto record = [&](size_t idx, const CMat& rho) {
    for (int l = 0; l < dim; ++l) res.populations[l][idx] = rho(l, l).real();
    res.coherence_h1h2[idx] = rho(coh_i, coh_j);
    const double tracedef = std::abs(rho.trace() - cplx(1.0));
    res.max_trace_defect = std::max(res.max_trace_defect, tracedef);
    const double mineig = hermitian_eigenvalues(rho).front();
    res.max_positivity_defect =
        std::max(res.max_positivity_defect, std::max(0.0, -mineig));
    double purity = 0.0;
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) purity += std::norm(rho(i, j));
    res.min_purity = std::min(res.min_purity, purity);
  };

  // samples exactly at the start
  while (next_sample < samples.size() && samples[next_sample] <= t + 1e-14) {
    record(next_sample, y);
    ++next_sample;
  }

  rhs(t, y, k1, hbuf);
  const double t_edge = 1e-12 * std::max(1.0, std::abs(t_end));
  while (t_end - t > t_edge) {
    h = std::min(h, cfg.max_step);
    if (h < 1e-13 * std::max(1.0, std::abs(t)))
      throw EvolveError("step-size underflow at t = " + std::to_string(t) +
                        " ps (scaled local error " + std::to_string(err_prev) + ")");
    // clamping to the window edge must not look like an underflow
    h = std::min(h, t_end - t);

    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) ytmp(i, j) = y(i, j) + h * (a21 * k1(i, j));
    rhs(t + c2 * h, ytmp, k2, hbuf);

    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j)
        ytmp(i, j) = y(i, j) + h * (a31 * k1(i, j) + a32 * k2(i, j));
    rhs(t + c3 * h, ytmp, k3, hbuf);

    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j)
        ytmp(i, j) = y(i, j) + h * (a41 * k1(i, j) + a42 * k2(i, j) + a43 * k3(i, j));
    rhs(t + c4 * h, ytmp, k4, hbuf);

    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j)
        ytmp(i, j) = y(i, j) + h * (a51 * k1(i, j) + a52 * k2(i, j) +
                                    a53 * k3(i, j) + a54 * k4(i, j));
    rhs(t + c5 * h, ytmp, k5, hbuf);

    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j)
        ytmp(i, j) = y(i, j) + h * (a61 * k1(i, j) + a62 * k2(i, j) + a63 * k3(i, j) +
                                    a64 * k4(i, j) + a65 * k5(i, j));
    rhs(t + h, ytmp, k6, hbuf);

    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j)
        y1(i, j) = y(i, j) + h * (b1 * k1(i, j) + b3 * k3(i, j) + b4 * k4(i, j) +
                                  b5 * k5(i, j) + b6 * k6(i, j));
    rhs(t + h, y1, k7, hbuf);

    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j)
        err(i, j) = h * (e1 * k1(i, j) + e3 * k3(i, j) + e4 * k4(i, j) +
                         e5 * k5(i, j) + e6 * k6(i, j) + e7 * k7(i, j));

    const double en = error_norm(err, y, y1, dim, cfg.abs_tol, cfg.rel_tol);

    if (en <= 1.0) {
      // accept; dense output inside (t, t+h]
      while (next_sample < samples.size() && samples[next_sample] <= t + h + 1e-14) {
        const double th = std::clamp((samples[next_sample] - t) / h, 0.0, 1.0);
        CMat ys(dim);
        for (int i = 0; i < dim; ++i)
          for (int j = 0; j < dim; ++j) {
            const cplx dy = y1(i, j) - y(i, j);
            const cplx r1 = y(i, j);
            const cplx r2 = dy;
            const cplx r3 = h * k1(i, j) - dy;
            const cplx r4 = dy - h * k7(i, j) - r3;
            const cplx r5 = h * (d1 * k1(i, j) + d3 * k3(i, j) + d4 * k4(i, j) +
                                 d5 * k5(i, j) + d6 * k6(i, j) + d7 * k7(i, j));
            ys(i, j) = r1 + th * (r2 + (1.0 - th) * (r3 + th * (r4 + (1.0 - th) * r5)));
          }
        ys.hermitize();
        record(next_sample, ys);
        ++next_sample;
      }

      t += h;
      y = y1;
      y.hermitize();
      k1 = k7;  // FSAL
      ++res.steps_accepted;

      const double fac = 0.9 * std::pow(std::max(en, 1e-10), -0.17) *
                         std::pow(err_prev, 0.04);
      double grow = std::clamp(fac, 0.2, rejected_last ? 1.0 : 5.0);
      h *= grow;
      err_prev = std::max(en, 1e-10);
      rejected_last = false;
      first = false;
    } else {
      ++res.steps_rejected;
      const double fac = std::clamp(0.9 * std::pow(en, -0.2), 0.1, 0.9);
      h *= fac;
      rejected_last = true;
      if (first) err_prev = 1.0;
    }
  }

  res.final_rho = y;
  res.final_trace_defect = std::abs(y.trace() - cplx(1.0));
  // flush any samples that coincide with t_end within tolerance
  while (next_sample < samples.size()) {
    record(next_sample, y);
    ++next_sample;
  }
  return res;
}

double final_population(const SimResult& result, std::string_view label) {
  if (result.labels.empty())
    throw std::invalid_argument("final_population: result carries no level labels");
  for (size_t i = 0; i < result.labels.size(); ++i)
    if (result.labels[i] == label)
      return result.populations[i].back();
  throw std::invalid_argument("final_population: unknown level label: " +
                              std::string(label));
}

}  // namespace qraman
