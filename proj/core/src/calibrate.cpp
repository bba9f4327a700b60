#include "qraman/calibrate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>

#include "qraman/constants.hpp"
#include "qraman/parallel.hpp"

namespace qraman {

namespace {

double transfer_at(const ExperimentConfig& cfg, double delta, double area) {
  ExperimentConfig c = cfg;
  c.energies.small_delta = delta;
  const auto pulse = make_raman_pulse(c, 0.0, area, c.phase);
  const auto seq = PulseSequence::over({pulse}, c.window_sigmas);
  return run_sequence(c, seq, 0);
}

struct Vertex {
  double d, a, f;
};

}  // namespace

CalibrationTable find_pi_condition(const ExperimentConfig& cfg,
                                   std::pair<double, double> delta_range,
                                   std::pair<double, double> area_range,
                                   int grid_delta, int grid_area) {
  if (grid_delta < 21 || grid_area < 21)
    throw CalibrationError("find_pi_condition: coarse grid must be at least 21x21");

  Axis dax{"delta_mev", delta_range.first, delta_range.second, grid_delta, 1.0};
  Axis aax{"stokes_area_rad", area_range.first, area_range.second, grid_area, 1.0};
  const SweepTable t = detuning_area_map(cfg, dax, aax);

  // strict > keeps the first (smallest delta, then smallest area) of ties
  std::size_t best = 0;
  for (std::size_t i = 1; i < t.values.size(); ++i)
    if (t.values[i] > t.values[best]) best = i;
  const int bi = static_cast<int>(best) / grid_area;
  const int bj = static_cast<int>(best) % grid_area;

  CalibrationTable cal;
  cal.boundary_warning = (bi == 0 || bi == grid_delta - 1 || bj == 0 ||
                          bj == grid_area - 1);

  const double dstep = (delta_range.second - delta_range.first) / (grid_delta - 1);
  const double astep = (area_range.second - area_range.first) / (grid_area - 1);

  auto clamp_d = [&](double d) {
    return std::clamp(d, delta_range.first, delta_range.second);
  };
  auto clamp_a = [&](double a) {
    return std::clamp(a, std::max(0.0, area_range.first), area_range.second);
  };
  auto f = [&](double d, double a) { return transfer_at(cfg, clamp_d(d), clamp_a(a)); };

  // Nelder-Mead on -transfer, seeded at the best grid point
  std::array<Vertex, 3> s;
  const double d0 = dax.value(bi);
  const double a0 = aax.value(bj);
  s[0] = {d0, a0, t.values[best]};
  s[1] = {clamp_d(d0 + 0.5 * dstep), a0, 0.0};
  s[2] = {d0, clamp_a(a0 + 0.5 * astep), 0.0};
  s[1].f = f(s[1].d, s[1].a);
  s[2].f = f(s[2].d, s[2].a);

  auto order = [&]() {
    std::sort(s.begin(), s.end(), [](const Vertex& x, const Vertex& y) {
      return x.f > y.f;  // best first (maximizing)
    });
  };
  order();

  for (int it = 0; it < 200; ++it) {
    const double dspread = std::max({std::abs(s[0].d - s[1].d),
                                     std::abs(s[0].d - s[2].d),
                                     std::abs(s[1].d - s[2].d)});
    const double aspread = std::max({std::abs(s[0].a - s[1].a),
                                     std::abs(s[0].a - s[2].a),
                                     std::abs(s[1].a - s[2].a)});
    if (dspread < 1e-4 && aspread < 1e-3) break;

    const double cd = 0.5 * (s[0].d + s[1].d);
    const double ca = 0.5 * (s[0].a + s[1].a);
    Vertex refl{clamp_d(cd + (cd - s[2].d)), clamp_a(ca + (ca - s[2].a)), 0.0};
    refl.f = f(refl.d, refl.a);
    if (refl.f > s[0].f) {
      Vertex exp_{clamp_d(cd + 2.0 * (cd - s[2].d)),
                  clamp_a(ca + 2.0 * (ca - s[2].a)), 0.0};
      exp_.f = f(exp_.d, exp_.a);
      s[2] = (exp_.f > refl.f) ? exp_ : refl;
    } else if (refl.f > s[1].f) {
      s[2] = refl;
    } else {
      Vertex con{clamp_d(cd + 0.5 * (s[2].d - cd)),
                 clamp_a(ca + 0.5 * (s[2].a - ca)), 0.0};
      con.f = f(con.d, con.a);
      if (con.f > s[2].f) {
        s[2] = con;
      } else {
        // shrink toward the best vertex
        for (int k = 1; k < 3; ++k) {
          s[k].d = clamp_d(s[0].d + 0.5 * (s[k].d - s[0].d));
          s[k].a = clamp_a(s[0].a + 0.5 * (s[k].a - s[0].a));
          s[k].f = f(s[k].d, s[k].a);
        }
      }
    }
    order();
  }

  cal.delta_star = s[0].d;
  cal.stokes_area_pi = s[0].a;
  cal.pump_area = cfg.pump_area;
  cal.transfer_at_pi = s[0].f;
  cal.system_hash = t.metadata.at("config_hash");

  if (cal.transfer_at_pi < 0.5)
    throw CalibrationError(
        "find_pi_condition: no usable pi condition (best transfer " +
        std::to_string(cal.transfer_at_pi) + " < 0.5)");
  return cal;
}

SynthesisResult synthesize_rotation(double theta, double phi,
                                    const CalibrationTable& cal,
                                    const ExperimentConfig& cfg) {
  if (!(theta >= 0.0) || !(theta < 2.0 * kPi))
    throw std::invalid_argument("synthesize_rotation: theta must be in [0, 2pi)");
  if (!(cal.stokes_area_pi > 0.0))
    throw std::invalid_argument("synthesize_rotation: invalid calibration");

  ExperimentConfig c = cfg;
  c.energies.small_delta = cal.delta_star;
  c.pump_area = cal.pump_area;

  SynthesisResult out;
  out.delta_star = cal.delta_star;
  out.target_c_h2 = std::sin(0.5 * theta) * std::sin(0.5 * theta);
  const double area = (theta / kPi) * cal.stokes_area_pi;
  out.pulse = make_raman_pulse(c, 0.0, area, phi);

  const auto seq = PulseSequence::over({out.pulse}, c.window_sigmas);
  out.verified_c_h2 = run_sequence(c, seq, 0);
  out.verification_warning = std::abs(out.verified_c_h2 - out.target_c_h2) > 0.03;
  return out;
}

void write_calibration(std::ostream& os, const CalibrationTable& cal) {
  char buf[96];
  auto line = [&](const char* k, double v) {
    std::snprintf(buf, sizeof buf, "%s = %.12g\n", k, v);
    os << buf;
  };
  line("delta_star_mev", cal.delta_star);
  line("stokes_area_pi_rad", cal.stokes_area_pi);
  line("pump_area_rad", cal.pump_area);
  line("transfer_at_pi", cal.transfer_at_pi);
  os << "system_hash = " << cal.system_hash << "\n";
  os << "boundary_warning = " << (cal.boundary_warning ? 1 : 0) << "\n";
}

CalibrationTable read_calibration(std::istream& is) {
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(is, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  CalibrationTable cal;
  try {
    cal.delta_star = std::stod(kv.at("delta_star_mev"));
    cal.stokes_area_pi = std::stod(kv.at("stokes_area_pi_rad"));
    cal.pump_area = std::stod(kv.at("pump_area_rad"));
    cal.transfer_at_pi = std::stod(kv.at("transfer_at_pi"));
    cal.system_hash = kv.at("system_hash");
    cal.boundary_warning = kv.count("boundary_warning") && kv.at("boundary_warning") == "1";
  } catch (const std::out_of_range&) {
    throw CalibrationError("calibration file: missing field");
  }
  return cal;
}

}  // namespace qraman
