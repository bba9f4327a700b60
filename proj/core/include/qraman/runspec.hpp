#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "qraman/experiments.hpp"

namespace qraman {

enum class Command {
  rabi,
  map,
  delay,
  ramsey,
  decay,
  phase_area,
  t1,
  noise_mc,
  high_orbital,
  calibrate,
  synthesize,
  validate
};

Command command_from_name(const std::string& name);  // throws ConfigError
std::string command_name(Command c);

enum class OutputFormat { csv, json };

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunSpec {
  Command command = Command::validate;
  ExperimentConfig cfg;
  bool stokes_area_given = false;  // else pi-calibrated at the configured delta

  // per-command extras
  Axis delta_axis{"delta_mev", 0.0, 0.5, 41, 1.0};
  Axis stokes_area_axis{"stokes_area_pi", 0.0, 4.0 * kPi, 41, kPi};
  Axis delay_axis{"delay_ps", -24.0, 24.0, 49, 1.0};
  Axis interval_axis{"interval_ps", 15.0, 65.0, 501, 1.0};
  Axis theta_axis{"theta_pi", 0.0, 4.0 * kPi, 41, kPi};
  Axis phase_axis{"phase_rad", 0.0, 2.0 * kPi, 25, 1.0};
  std::vector<double> phase_values{0.0};
  std::vector<double> coarse_intervals;
  int fixed_interval_periods = 21;
  int n_samples = 100;
  Command inner = Command::ramsey;
  bool has_readout = false;
  double readout_p_cw = 400.0;
  double readout_p0 = 396.0;
  std::pair<double, double> cal_delta_range{0.0, 0.5};
  std::pair<double, double> cal_area_range{0.5 * kPi, 4.0 * kPi};
  int cal_grid_delta = 21;
  int cal_grid_area = 21;
  std::string cal_file;
  double synth_theta = 0.5 * kPi;
  double synth_phi = 0.0;
  bool placeholder_high_orbital = false;  // delta13/mu5 defaults in use

  std::string output_dir = ".";
  OutputFormat format = OutputFormat::csv;
  std::string config_hash;
  std::string normalized_config;  // effective config, defaults filled in
};

// Parses a single JSON document; duplicate keys, unknown keys, and
// unit-suffix mismatches are rejected with the offending key named.
// overrides are "dotted.path=json-value" strings, applied before validation
// (flags > file > defaults).
RunSpec load_config(const std::string& path,
                    const std::vector<std::string>& overrides = {},
                    const std::string& command = "");
RunSpec load_config_text(const std::string& text,
                         const std::vector<std::string>& overrides = {},
                         const std::string& command = "");

// Executes the run: writes one data file per sweep plus a JSON summary into
// spec.output_dir. Returns 0; numerical failures raise (exit code 3 at the
// CLI), config problems raise ConfigError (exit code 2).
int run(const RunSpec& spec, std::ostream& log);

}  // namespace qraman
