#include "qraman/runspec.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "qraman/calibrate.hpp"
#include "qraman/constants.hpp"
#include "qraman/fit.hpp"

namespace qraman {

using json = nlohmann::json;

namespace {

// SAX pass that only checks for duplicate object keys.
struct DupKeySax {
  std::vector<std::set<std::string>> stack;
  std::string dup;

  bool null() { return true; }
  bool boolean(bool) { return true; }
  bool number_integer(json::number_integer_t) { return true; }
  bool number_unsigned(json::number_unsigned_t) { return true; }
  bool number_float(json::number_float_t, const std::string&) { return true; }
  bool string(std::string&) { return true; }
  bool binary(json::binary_t&) { return true; }
  bool start_object(std::size_t) {
    stack.emplace_back();
    return true;
  }
  bool key(std::string& k) {
    if (!stack.back().insert(k).second) {
      dup = k;
      return false;
    }
    return true;
  }
  bool end_object() {
    stack.pop_back();
    return true;
  }
  bool start_array(std::size_t) { return true; }
  bool end_array() { return true; }
  bool parse_error(std::size_t, const std::string&, const json::exception&) {
    return false;
  }
};

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

std::pair<int, int> line_col(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

json parse_document(const std::string& text) {
  DupKeySax sax;
  if (!json::sax_parse(text, &sax)) {
    if (!sax.dup.empty()) fail("duplicate key: " + sax.dup);
    // fall through: re-parse below for a positioned message
  }
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_col(text, e.byte ? e.byte - 1 : 0);
    fail("JSON parse error at line " + std::to_string(line) + ", column " +
         std::to_string(col) + ": " + e.what());
  }
}

std::string strip_unit_suffix(const std::string& key) {
  static const std::vector<std::string> suffixes = {
      "_mev", "_ps", "_rad", "_pi", "_per_ps", "_nw", "_periods"};
  for (const auto& s : suffixes)
    if (key.size() > s.size() &&
        key.compare(key.size() - s.size(), s.size(), s) == 0)
      return key.substr(0, key.size() - s.size());
  return key;
}

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& where) {
  if (!obj.is_object()) fail(where + ": expected an object");
  for (const auto& [k, v] : obj.items()) {
    if (allowed.count(k)) continue;
    const std::string base = strip_unit_suffix(k);
    for (const auto& a : allowed) {
      if (strip_unit_suffix(a) == base)
        fail(where + ": unit-suffix mismatch: '" + k + "' should be '" + a + "'");
    }
    fail(where + ": unknown key: " + k);
  }
}

double get_num(const json& obj, const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number()) fail("field '" + key + "' must be a number");
  return v.get<double>();
}

std::optional<double> get_opt(const json& obj, const std::string& key) {
  if (!obj.contains(key)) return std::nullopt;
  const auto& v = obj.at(key);
  if (!v.is_number()) fail("field '" + key + "' must be a number");
  return v.get<double>();
}

int get_int(const json& obj, const std::string& key, int fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) fail("field '" + key + "' must be an integer");
  return v.get<int>();
}

Axis parse_axis(const json& axes, const std::string& key, Axis fallback) {
  if (!axes.contains(key)) return fallback;
  const json& a = axes.at(key);
  check_keys(a, {"lo", "hi", "count"}, "axes." + key);
  Axis out = fallback;
  const double scale = fallback.display_scale;
  out.lo = get_num(a, "lo", fallback.lo / scale) * scale;
  out.hi = get_num(a, "hi", fallback.hi / scale) * scale;
  out.count = get_int(a, "count", fallback.count);
  if (out.count < 1) fail("axes." + key + ".count must be >= 1");
  if (out.count > 1 && !(out.hi > out.lo))
    fail("axes." + key + ": hi must exceed lo");
  return out;
}

void apply_override(json& root, const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos || eq == 0)
    fail("--set expects key.path=value, got: " + kv);
  const std::string path = kv.substr(0, eq);
  const std::string value = kv.substr(eq + 1);
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::parse_error&) {
    parsed = value;  // bare string
  }
  json* node = &root;
  std::size_t pos = 0;
  for (;;) {
    const auto dot = path.find('.', pos);
    const std::string part = path.substr(pos, dot - pos);
    if (part.empty()) fail("--set: empty path segment in: " + path);
    if (dot == std::string::npos) {
      (*node)[part] = parsed;
      return;
    }
    node = &(*node)[part];
    pos = dot + 1;
  }
}

SystemKind system_from_name(const std::string& s) {
  if (s == "three-level") return SystemKind::ThreeLevel;
  if (s == "four-level-hot") return SystemKind::FourLevelHot;
  if (s == "four-level-high") return SystemKind::FourLevelHigh;
  if (s == "two-level-effective") return SystemKind::TwoLevelEffective;
  fail("unknown system: " + s + " (expected three-level, four-level-hot, "
       "four-level-high, or two-level-effective)");
}

std::string system_name(SystemKind k) {
  switch (k) {
    case SystemKind::ThreeLevel: return "three-level";
    case SystemKind::FourLevelHot: return "four-level-hot";
    case SystemKind::FourLevelHigh: return "four-level-high";
    case SystemKind::TwoLevelEffective: return "two-level-effective";
  }
  return "?";
}

bool wants_dissipation_defaults(Command c) {
  return c == Command::ramsey || c == Command::decay || c == Command::t1 ||
         c == Command::noise_mc;
}

std::uint64_t fnv64(const std::string& s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001B3ull;
  }
  return h;
}

}  // namespace

Command command_from_name(const std::string& name) {
  if (name == "rabi") return Command::rabi;
  if (name == "map") return Command::map;
  if (name == "delay") return Command::delay;
  if (name == "ramsey") return Command::ramsey;
  if (name == "decay") return Command::decay;
  if (name == "phase-area") return Command::phase_area;
  if (name == "t1") return Command::t1;
  if (name == "noise-mc") return Command::noise_mc;
  if (name == "high-orbital") return Command::high_orbital;
  if (name == "calibrate") return Command::calibrate;
  if (name == "synthesize") return Command::synthesize;
  if (name == "validate") return Command::validate;
  fail("unknown command: " + name);
}

std::string command_name(Command c) {
  switch (c) {
    case Command::rabi: return "rabi";
    case Command::map: return "map";
    case Command::delay: return "delay";
    case Command::ramsey: return "ramsey";
    case Command::decay: return "decay";
    case Command::phase_area: return "phase-area";
    case Command::t1: return "t1";
    case Command::noise_mc: return "noise-mc";
    case Command::high_orbital: return "high-orbital";
    case Command::calibrate: return "calibrate";
    case Command::synthesize: return "synthesize";
    case Command::validate: return "validate";
  }
  return "?";
}

RunSpec load_config_text(const std::string& text,
                         const std::vector<std::string>& overrides,
                         const std::string& command) {
  json root = text.empty() ? json::object() : parse_document(text);
  if (!root.is_object()) fail("config root must be a JSON object");
  for (const auto& kv : overrides) apply_override(root, kv);

  check_keys(root,
             {"command", "system", "energies", "dipoles", "pulse", "integrator",
              "dissipation", "noise", "axes", "experiment", "calibration",
              "synthesize", "seed", "output_dir", "format"},
             "config");

  RunSpec spec;

  std::string cmd = command;
  if (cmd.empty() && root.contains("command")) {
    if (!root.at("command").is_string()) fail("field 'command' must be a string");
    cmd = root.at("command").get<std::string>();
  }
  if (cmd.empty()) fail("no command given (CLI subcommand or 'command' field)");
  spec.command = command_from_name(cmd);

  if (spec.command == Command::high_orbital) {
    spec.cfg.system.kind = SystemKind::FourLevelHigh;
  } else {
    spec.cfg.system.kind = SystemKind::ThreeLevel;
  }
  if (root.contains("system")) {
    if (!root.at("system").is_string()) fail("field 'system' must be a string");
    spec.cfg.system.kind = system_from_name(root.at("system").get<std::string>());
  }

  if (root.contains("energies")) {
    const json& e = root.at("energies");
    check_keys(e,
               {"delta12_mev", "big_delta_mev", "small_delta_mev",
                "delta_hot_mev", "delta13_mev"},
               "energies");
    spec.cfg.energies.delta12 = get_num(e, "delta12_mev", spec.cfg.energies.delta12);
    spec.cfg.energies.big_delta = get_num(e, "big_delta_mev", spec.cfg.energies.big_delta);
    spec.cfg.energies.small_delta = get_num(e, "small_delta_mev", spec.cfg.energies.small_delta);
    spec.cfg.energies.delta_hot = get_opt(e, "delta_hot_mev");
    spec.cfg.energies.delta13 = get_opt(e, "delta13_mev");
  }
  if (root.contains("dipoles")) {
    const json& d = root.at("dipoles");
    check_keys(d, {"mu2", "mu3", "mu4", "mu5"}, "dipoles");
    spec.cfg.dipoles.mu2 = get_num(d, "mu2", spec.cfg.dipoles.mu2);
    spec.cfg.dipoles.mu3 = get_num(d, "mu3", spec.cfg.dipoles.mu3);
    spec.cfg.dipoles.mu4 = get_num(d, "mu4", spec.cfg.dipoles.mu4);
    spec.cfg.dipoles.mu5 = get_opt(d, "mu5");
  }
  if (root.contains("pulse")) {
    const json& p = root.at("pulse");
    check_keys(p, {"fwhm_ps", "pump_area_pi", "stokes_area_pi", "phase_rad"},
               "pulse");
    spec.cfg.fwhm_ps = get_num(p, "fwhm_ps", spec.cfg.fwhm_ps);
    spec.cfg.pump_area = get_num(p, "pump_area_pi", spec.cfg.pump_area / kPi) * kPi;
    if (p.contains("stokes_area_pi")) {
      spec.cfg.stokes_area_target = get_num(p, "stokes_area_pi", 0.0) * kPi;
      spec.stokes_area_given = true;
    }
    spec.cfg.phase = get_num(p, "phase_rad", spec.cfg.phase);
  }
  if (root.contains("integrator")) {
    const json& i = root.at("integrator");
    check_keys(i, {"rel_tol", "abs_tol", "max_step_ps", "window_sigmas"},
               "integrator");
    spec.cfg.integrator.rel_tol = get_num(i, "rel_tol", spec.cfg.integrator.rel_tol);
    spec.cfg.integrator.abs_tol = get_num(i, "abs_tol", spec.cfg.integrator.abs_tol);
    spec.cfg.integrator.max_step = get_num(i, "max_step_ps", spec.cfg.integrator.max_step);
    spec.cfg.window_sigmas = get_num(i, "window_sigmas", spec.cfg.window_sigmas);
  }
  if (root.contains("dissipation")) {
    const json& g = root.at("dissipation");
    check_keys(g, {"gamma1_per_ps", "gamma2_per_ps"}, "dissipation");
    spec.cfg.gamma1 = get_num(g, "gamma1_per_ps", 0.0);
    spec.cfg.gamma2 = get_num(g, "gamma2_per_ps", 0.0);
  } else if (wants_dissipation_defaults(spec.command)) {
    spec.cfg.gamma1 = 1.0 / 263.0;
    spec.cfg.gamma2 = 1.0 / 159.0;
  }
  if (root.contains("noise")) {
    const json& n = root.at("noise");
    check_keys(n, {"phase_fwhm_rad", "span_fraction", "area_fraction"}, "noise");
    NoiseSpec ns;
    ns.phase_fwhm = get_num(n, "phase_fwhm_rad", ns.phase_fwhm);
    ns.span_fraction_fwhm = get_num(n, "span_fraction", ns.span_fraction_fwhm);
    ns.area_fraction_fwhm = get_num(n, "area_fraction", ns.area_fraction_fwhm);
    spec.cfg.noise = ns;
  } else if (spec.command == Command::noise_mc) {
    spec.cfg.noise = NoiseSpec{};
  }

  if (root.contains("seed")) {
    if (!root.at("seed").is_number_integer()) fail("field 'seed' must be an integer");
    spec.cfg.seed = root.at("seed").get<std::uint64_t>();
  }
  if (root.contains("output_dir")) {
    if (!root.at("output_dir").is_string()) fail("field 'output_dir' must be a string");
    spec.output_dir = root.at("output_dir").get<std::string>();
  }
  if (root.contains("format")) {
    if (!root.at("format").is_string()) fail("field 'format' must be a string");
    const std::string f = root.at("format").get<std::string>();
    if (f == "csv") spec.format = OutputFormat::csv;
    else if (f == "json") spec.format = OutputFormat::json;
    else fail("field 'format' must be csv or json");
  }

  const json axes = root.value("axes", json::object());
  check_keys(axes,
             {"delta_mev", "stokes_area_pi", "delay_ps", "interval_ps",
              "theta_pi", "phase_rad"},
             "axes");
  if (spec.command == Command::t1)
    spec.interval_axis = Axis{"interval_ps", 20.0, 420.0, 101, 1.0};
  spec.delta_axis = parse_axis(axes, "delta_mev", spec.delta_axis);
  spec.stokes_area_axis = parse_axis(axes, "stokes_area_pi", spec.stokes_area_axis);
  spec.delay_axis = parse_axis(axes, "delay_ps", spec.delay_axis);
  spec.interval_axis = parse_axis(axes, "interval_ps", spec.interval_axis);
  spec.theta_axis = parse_axis(axes, "theta_pi", spec.theta_axis);
  spec.phase_axis = parse_axis(axes, "phase_rad", spec.phase_axis);

  if (root.contains("experiment")) {
    const json& x = root.at("experiment");
    check_keys(x,
               {"phase_values_rad", "coarse_intervals_ps",
                "fixed_interval_periods", "n_samples", "inner", "readout"},
               "experiment");
    if (x.contains("phase_values_rad")) {
      if (!x.at("phase_values_rad").is_array())
        fail("experiment.phase_values_rad must be an array");
      spec.phase_values = x.at("phase_values_rad").get<std::vector<double>>();
      if (spec.phase_values.empty())
        fail("experiment.phase_values_rad must be non-empty");
    }
    if (x.contains("coarse_intervals_ps")) {
      if (!x.at("coarse_intervals_ps").is_array())
        fail("experiment.coarse_intervals_ps must be an array");
      spec.coarse_intervals = x.at("coarse_intervals_ps").get<std::vector<double>>();
    }
    spec.fixed_interval_periods = get_int(x, "fixed_interval_periods", spec.fixed_interval_periods);
    spec.n_samples = get_int(x, "n_samples", spec.n_samples);
    if (x.contains("inner")) {
      if (!x.at("inner").is_string()) fail("experiment.inner must be a string");
      spec.inner = command_from_name(x.at("inner").get<std::string>());
      if (spec.inner != Command::ramsey && spec.inner != Command::rabi &&
          spec.inner != Command::phase_area)
        fail("experiment.inner must be ramsey, rabi, or phase-area");
    }
    if (x.contains("readout")) {
      const json& r = x.at("readout");
      check_keys(r, {"p_cw_nw", "p0_nw"}, "experiment.readout");
      spec.has_readout = true;
      spec.readout_p_cw = get_num(r, "p_cw_nw", spec.readout_p_cw);
      spec.readout_p0 = get_num(r, "p0_nw", spec.readout_p0);
    }
  }
  if (spec.coarse_intervals.empty())
    for (int i = 1; i <= 10; ++i) spec.coarse_intervals.push_back(20.0 * i);

  if (root.contains("calibration")) {
    const json& c = root.at("calibration");
    check_keys(c,
               {"delta_range_mev", "stokes_area_range_pi", "grid_delta",
                "grid_area", "file"},
               "calibration");
    if (c.contains("delta_range_mev")) {
      const auto v = c.at("delta_range_mev").get<std::vector<double>>();
      if (v.size() != 2) fail("calibration.delta_range_mev must be [lo, hi]");
      spec.cal_delta_range = {v[0], v[1]};
    }
    if (c.contains("stokes_area_range_pi")) {
      const auto v = c.at("stokes_area_range_pi").get<std::vector<double>>();
      if (v.size() != 2) fail("calibration.stokes_area_range_pi must be [lo, hi]");
      spec.cal_area_range = {v[0] * kPi, v[1] * kPi};
    }
    spec.cal_grid_delta = get_int(c, "grid_delta", spec.cal_grid_delta);
    spec.cal_grid_area = get_int(c, "grid_area", spec.cal_grid_area);
    if (c.contains("file")) {
      if (!c.at("file").is_string()) fail("calibration.file must be a string");
      spec.cal_file = c.at("file").get<std::string>();
    }
  }
  if (root.contains("synthesize")) {
    const json& s = root.at("synthesize");
    check_keys(s, {"theta_pi", "phi_rad"}, "synthesize");
    spec.synth_theta = get_num(s, "theta_pi", spec.synth_theta / kPi) * kPi;
    spec.synth_phi = get_num(s, "phi_rad", spec.synth_phi);
  }

  // cross-field requirements
  if (spec.cfg.system.kind == SystemKind::FourLevelHot &&
      !spec.cfg.energies.delta_hot)
    fail("system four-level-hot requires energies.delta_hot_mev");
  if (spec.cfg.system.kind == SystemKind::FourLevelHigh) {
    if (!spec.cfg.energies.delta13) {
      spec.cfg.energies.delta13 = 2.0 * spec.cfg.energies.delta12;
      spec.placeholder_high_orbital = true;
    }
    if (!spec.cfg.dipoles.mu5) {
      spec.cfg.dipoles.mu5 = 0.1;
      spec.placeholder_high_orbital = true;
    }
  }
  if (spec.command == Command::synthesize && spec.cal_file.empty())
    fail("synthesize requires calibration.file");
  if (!(spec.cfg.fwhm_ps > 0.0)) fail("pulse.fwhm_ps must be > 0");
  if (spec.cfg.pump_area < 0.0) fail("pulse.pump_area_pi must be >= 0");
  if (spec.n_samples < 1) fail("experiment.n_samples must be >= 1");

  // normalized echo of the effective configuration
  json echo;
  echo["command"] = command_name(spec.command);
  echo["system"] = system_name(spec.cfg.system.kind);
  echo["energies"]["delta12_mev"] = spec.cfg.energies.delta12;
  echo["energies"]["big_delta_mev"] = spec.cfg.energies.big_delta;
  echo["energies"]["small_delta_mev"] = spec.cfg.energies.small_delta;
  if (spec.cfg.energies.delta_hot)
    echo["energies"]["delta_hot_mev"] = *spec.cfg.energies.delta_hot;
  if (spec.cfg.energies.delta13)
    echo["energies"]["delta13_mev"] = *spec.cfg.energies.delta13;
  echo["dipoles"]["mu2"] = spec.cfg.dipoles.mu2;
  echo["dipoles"]["mu3"] = spec.cfg.dipoles.mu3;
  echo["dipoles"]["mu4"] = spec.cfg.dipoles.mu4;
  if (spec.cfg.dipoles.mu5) echo["dipoles"]["mu5"] = *spec.cfg.dipoles.mu5;
  echo["pulse"]["fwhm_ps"] = spec.cfg.fwhm_ps;
  echo["pulse"]["pump_area_pi"] = spec.cfg.pump_area / kPi;
  if (spec.stokes_area_given)
    echo["pulse"]["stokes_area_pi"] = spec.cfg.stokes_area_target / kPi;
  echo["pulse"]["phase_rad"] = spec.cfg.phase;
  echo["integrator"]["rel_tol"] = spec.cfg.integrator.rel_tol;
  echo["integrator"]["abs_tol"] = spec.cfg.integrator.abs_tol;
  echo["integrator"]["max_step_ps"] = spec.cfg.integrator.max_step;
  echo["integrator"]["window_sigmas"] = spec.cfg.window_sigmas;
  echo["dissipation"]["gamma1_per_ps"] = spec.cfg.gamma1;
  echo["dissipation"]["gamma2_per_ps"] = spec.cfg.gamma2;
  if (spec.cfg.noise) {
    echo["noise"]["phase_fwhm_rad"] = spec.cfg.noise->phase_fwhm;
    echo["noise"]["span_fraction"] = spec.cfg.noise->span_fraction_fwhm;
    echo["noise"]["area_fraction"] = spec.cfg.noise->area_fraction_fwhm;
  }
  echo["seed"] = spec.cfg.seed;
  spec.normalized_config = echo.dump();
  char hashbuf[24];
  std::snprintf(hashbuf, sizeof hashbuf, "%016llx",
                static_cast<unsigned long long>(fnv64(spec.normalized_config)));
  spec.config_hash = hashbuf;
  return spec;
}

RunSpec load_config(const std::string& path,
                    const std::vector<std::string>& overrides,
                    const std::string& command) {
  std::string text;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) fail("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  return load_config_text(text, overrides, command);
}

namespace {

struct RunContext {
  const RunSpec& spec;
  ExperimentConfig cfg;  // with the pi / half-pi areas resolved
  json summary;
  std::vector<std::string> files;
};

void write_table(RunContext& rc, const SweepTable& table,
                 const std::string& stem) {
  namespace fs = std::filesystem;
  fs::create_directories(rc.spec.output_dir);
  if (rc.spec.format == OutputFormat::csv) {
    const std::string path = (fs::path(rc.spec.output_dir) / (stem + ".csv")).string();
    std::ofstream os(path, std::ios::binary);
    if (!os) fail("cannot write: " + path);
    table.write_csv(os);
    rc.files.push_back(path);
  } else {
    const std::string path = (fs::path(rc.spec.output_dir) / (stem + ".json")).string();
    std::ofstream os(path, std::ios::binary);
    if (!os) fail("cannot write: " + path);
    json j;
    for (const auto& ax : table.axes) {
      json a;
      a["name"] = ax.name;
      std::vector<double> vals(ax.count);
      for (int i = 0; i < ax.count; ++i) vals[i] = ax.value(i) / ax.display_scale;
      a["values"] = vals;
      j["axes"].push_back(a);
    }
    j["observable"] = table.observable;
    j["values"] = table.values;
    os << j.dump(2) << '\n';
    rc.files.push_back(path);
  }
}

// resolve the Stokes area: explicit config value, else the first transfer
// maximum at the configured two-photon detuning
double resolve_pi_area(RunContext& rc) {
  if (rc.spec.stokes_area_given) return rc.cfg.stokes_area_target;
  const double a = pi_area_at_delta(rc.cfg, 0.25 * kPi, 4.0 * kPi, 41);
  rc.summary["auto_pi_area_pi"] = a / kPi;
  return a;
}

void add_sinusoid_fit(json& dst, const FitResult& fr) {
  dst["freq_thz"] = fr.params.at("freq");
  dst["amp"] = fr.params.at("amp");
  // fringe-position convention: y = b + amp*cos(2 pi f x - fringe_phase)
  dst["fringe_phase_rad"] = -fr.params.at("phase");
  dst["offset"] = fr.params.at("offset");
  dst["converged"] = fr.converged;
}

void run_dispatch(RunContext& rc, std::ostream& log) {
  const RunSpec& spec = rc.spec;
  switch (spec.command) {
    case Command::rabi: {
      SweepTable t = rabi_sweep(rc.cfg, spec.stokes_area_axis);
      const auto [amax, _] = t.argmax();
      rc.summary["extrema"]["max_c_h2"] = t.max_value();
      rc.summary["extrema"]["stokes_area_pi"] = amax / kPi;
      write_table(rc, t, "rabi");
      break;
    }
    case Command::map:
    case Command::high_orbital: {
      SweepTable t = spec.command == Command::high_orbital
                         ? high_orbital_map(rc.cfg, spec.delta_axis,
                                            spec.stokes_area_axis)
                         : detuning_area_map(rc.cfg, spec.delta_axis,
                                             spec.stokes_area_axis);
      const auto [dstar, astar] = t.argmax();
      rc.summary["extrema"]["max_transfer"] = t.max_value();
      rc.summary["extrema"]["delta_mev"] = dstar;
      rc.summary["extrema"]["stokes_area_pi"] = astar / kPi;
      if (spec.placeholder_high_orbital)
        rc.summary["warnings"].push_back(
            "delta13_mev/mu5 are placeholder defaults; configure them for a real device");
      write_table(rc, t, command_name(spec.command));
      break;
    }
    case Command::delay: {
      rc.cfg.stokes_area_target = resolve_pi_area(rc);
      SweepTable t = delay_scan(rc.cfg, spec.delay_axis);
      write_table(rc, t, "delay");
      try {
        std::vector<double> xs(t.axes[0].count), ys = t.values;
        for (int i = 0; i < t.axes[0].count; ++i) xs[i] = t.axes[0].value(i);
        const FitResult fr = fit(FitModel::gaussian, xs, ys);
        rc.summary["fit"]["model"] = "gaussian";
        rc.summary["fit"]["fwhm_ps"] = std::abs(fr.params.at("sigma")) * kFwhmToSigma;
        rc.summary["fit"]["center_ps"] = fr.params.at("center");
        rc.summary["fit"]["amp"] = fr.params.at("amp");
        rc.summary["fit"]["converged"] = fr.converged;
      } catch (const FitError& e) {
        rc.summary["warnings"].push_back(std::string("gaussian fit failed: ") + e.what());
      }
      break;
    }
    case Command::ramsey: {
      rc.cfg.stokes_area_target = 0.5 * resolve_pi_area(rc);
      SweepTable t = ramsey_scan(rc.cfg, spec.interval_axis, spec.phase_values);
      std::vector<double> xs(spec.interval_axis.count);
      for (int i = 0; i < spec.interval_axis.count; ++i)
        xs[i] = spec.interval_axis.value(i);
      write_table(rc, t, "ramsey");
      const int np = static_cast<int>(spec.phase_values.size());
      for (int j = 0; j < np; ++j) {
        try {
          std::vector<double> ys(spec.interval_axis.count);
          for (int i = 0; i < spec.interval_axis.count; ++i)
            ys[i] = t.values[t.index(i, j)];
          const FitResult fr = fit(FitModel::sinusoid, xs, ys);
          json jf;
          add_sinusoid_fit(jf, fr);
          jf["control_phase_rad"] = spec.phase_values[j];
          rc.summary["fits"].push_back(jf);
        } catch (const FitError& e) {
          rc.summary["warnings"].push_back(std::string("fringe fit failed: ") + e.what());
        }
      }
      break;
    }
    case Command::decay: {
      rc.cfg.stokes_area_target = 0.5 * resolve_pi_area(rc);
      const auto pts = coherence_decay_scan(rc.cfg, spec.coarse_intervals);
      SweepTable t;
      t.axes = {Axis{"interval_ps", pts.front().interval, pts.back().interval,
                     static_cast<int>(pts.size()), 1.0}};
      t.observable = "fringe_amplitude";
      for (const auto& p : pts) t.values.push_back(p.amplitude);
      std::vector<double> xs, ys;
      for (const auto& p : pts)
        if (p.converged) {
          xs.push_back(p.interval);
          ys.push_back(p.amplitude);
        }
      write_table(rc, t, "decay");
      try {
        const FitResult fr = fit(FitModel::exp_decay, xs, ys);
        rc.summary["fit"]["model"] = "exp_decay";
        rc.summary["fit"]["t2_ps"] = fr.params.at("tau");
        rc.summary["fit"]["converged"] = fr.converged;
      } catch (const FitError& e) {
        rc.summary["warnings"].push_back(std::string("decay fit failed: ") + e.what());
      }
      for (const auto& p : pts)
        if (!p.converged)
          rc.summary["warnings"].push_back(
              "fringe fit failed at interval " + std::to_string(p.interval) + " ps");
      break;
    }
    case Command::phase_area: {
      rc.cfg.stokes_area_target = resolve_pi_area(rc);
      const double period = 1.0 / fringe_frequency(rc.cfg);
      const double dt = spec.fixed_interval_periods * period;
      rc.summary["fixed_interval_ps"] = dt;
      SweepTable t = phase_area_map(rc.cfg, spec.theta_axis, spec.phase_axis, dt);
      write_table(rc, t, "phase-area");
      break;
    }
    case Command::t1: {
      rc.cfg.stokes_area_target = resolve_pi_area(rc);
      SweepTable t = t1_probe(rc.cfg, spec.interval_axis);
      write_table(rc, t, "t1");
      try {
        std::vector<double> xs(t.axes[0].count);
        for (int i = 0; i < t.axes[0].count; ++i) xs[i] = t.axes[0].value(i);
        const FitResult fr = fit(FitModel::exp_decay, xs, t.values);
        rc.summary["fit"]["model"] = "exp_decay";
        rc.summary["fit"]["t1_ps"] = fr.params.at("tau");
        rc.summary["fit"]["converged"] = fr.converged;
      } catch (const FitError& e) {
        rc.summary["warnings"].push_back(std::string("lifetime fit failed: ") + e.what());
      }
      if (spec.has_readout) {
        SweepTable scaled = t;
        scaled.observable = "readout_signal";
        for (auto& v : scaled.values)
          v = readout_signal(v, spec.readout_p_cw, spec.readout_p0);
        write_table(rc, scaled, "t1_readout");
      }
      break;
    }
    case Command::noise_mc: {
      rc.cfg.stokes_area_target = 0.5 * resolve_pi_area(rc);
      auto inner = [&](const ExperimentConfig& c) {
        switch (spec.inner) {
          case Command::ramsey:
            return ramsey_scan(c, spec.interval_axis, spec.phase_values);
          case Command::rabi:
            return rabi_sweep(c, spec.stokes_area_axis);
          default: {
            const double period = 1.0 / fringe_frequency(c);
            return phase_area_map(c, spec.theta_axis, spec.phase_axis,
                                  spec.fixed_interval_periods * period);
          }
        }
      };
      SweepTable t = noise_monte_carlo(rc.cfg, inner, spec.n_samples);
      rc.summary["n_samples"] = spec.n_samples;
      write_table(rc, t, "noise-mc");
      break;
    }
    case Command::calibrate: {
      const CalibrationTable cal = find_pi_condition(
          rc.cfg, spec.cal_delta_range, spec.cal_area_range, spec.cal_grid_delta,
          spec.cal_grid_area);
      namespace fs = std::filesystem;
      fs::create_directories(spec.output_dir);
      const std::string path =
          (fs::path(spec.output_dir) / "calibration.txt").string();
      std::ofstream os(path, std::ios::binary);
      if (!os) fail("cannot write: " + path);
      write_calibration(os, cal);
      rc.files.push_back(path);
      rc.summary["calibration"]["delta_star_mev"] = cal.delta_star;
      rc.summary["calibration"]["stokes_area_pi"] = cal.stokes_area_pi / kPi;
      rc.summary["calibration"]["transfer_at_pi"] = cal.transfer_at_pi;
      rc.summary["calibration"]["boundary_warning"] = cal.boundary_warning;
      break;
    }
    case Command::synthesize: {
      std::ifstream is(spec.cal_file);
      if (!is) fail("cannot open calibration file: " + spec.cal_file);
      const CalibrationTable cal = read_calibration(is);
      const SynthesisResult sr =
          synthesize_rotation(spec.synth_theta, spec.synth_phi, cal, rc.cfg);
      rc.summary["synthesis"]["theta_pi"] = spec.synth_theta / kPi;
      rc.summary["synthesis"]["phi_rad"] = spec.synth_phi;
      rc.summary["synthesis"]["stokes_area_pi"] =
          sr.pulse.stokes.area * target_mu(rc.cfg) / kPi;
      rc.summary["synthesis"]["delta_star_mev"] = sr.delta_star;
      rc.summary["synthesis"]["target_c_h2"] = sr.target_c_h2;
      rc.summary["synthesis"]["verified_c_h2"] = sr.verified_c_h2;
      rc.summary["synthesis"]["verification_warning"] = sr.verification_warning;
      if (sr.verification_warning)
        log << "warning: full-model verification deviates from sin^2(theta/2) "
               "by more than 0.03\n";
      break;
    }
    case Command::validate: {
      // config already validated at load; exercise the model once
      const auto pulse = make_raman_pulse(rc.cfg, 0.0, kPi, 0.0);
      const auto seq = PulseSequence::over({pulse}, rc.cfg.window_sigmas);
      if (rc.cfg.system.kind != SystemKind::TwoLevelEffective) {
        const CMat h = h_rot(rc.cfg.system, rc.cfg.energies, rc.cfg.dipoles, seq, 0.3);
        rc.summary["checks"]["h_rot_hermiticity_defect"] = h.hermiticity_defect();
      }
      const auto rho = basis_state(rc.cfg.system.dim(), 0);
      const auto rep = validate_density(rho);
      rc.summary["checks"]["rho0_trace_defect"] = rep.trace_defect;
      rc.summary["checks"]["rho0_min_eigenvalue"] = rep.min_eigenvalue;
      log << "config ok\n";
      break;
    }
  }
}

}  // namespace

int run(const RunSpec& spec, std::ostream& log) {
  const auto t0 = std::chrono::steady_clock::now();
  RunContext rc{spec, spec.cfg, json::object(), {}};
  rc.summary["command"] = command_name(spec.command);
  rc.summary["config_hash"] = spec.config_hash;
  rc.summary["seed"] = spec.cfg.seed;
  rc.summary["config"] = json::parse(spec.normalized_config);

  run_dispatch(rc, log);

  const auto t1 = std::chrono::steady_clock::now();
  rc.summary["wall_time_ms"] =
      std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
  rc.summary["files"] = rc.files;

  namespace fs = std::filesystem;
  fs::create_directories(spec.output_dir);
  const std::string spath =
      (fs::path(spec.output_dir) / (command_name(spec.command) + "_summary.json"))
          .string();
  std::ofstream os(spath, std::ios::binary);
  if (!os) fail("cannot write: " + spath);
  os << rc.summary.dump(2) << '\n';
  log << "wrote " << spath << '\n';
  for (const auto& f : rc.files) log << "wrote " << f << '\n';
  return 0;
}

}  // namespace qraman
