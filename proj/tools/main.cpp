#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qraman/runspec.hpp"

namespace {

struct CommonOpts {
  std::string config;
  std::vector<std::string> sets;
  std::string output_dir;
  std::string cal_file;
  std::string format;
  long long seed = -1;
};

int execute(const std::string& command, const CommonOpts& opts) {
  using namespace qraman;
  try {
    std::vector<std::string> overrides = opts.sets;
    // explicit flags win over both the file and --set
    if (!opts.output_dir.empty())
      overrides.push_back("output_dir=\"" + opts.output_dir + "\"");
    if (opts.seed >= 0) overrides.push_back("seed=" + std::to_string(opts.seed));
    if (!opts.format.empty()) overrides.push_back("format=\"" + opts.format + "\"");
    if (!opts.cal_file.empty())
      overrides.push_back("calibration.file=\"" + opts.cal_file + "\"");

    RunSpec spec = load_config(opts.config, overrides, command);
    return run(spec, std::cout);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "qraman: stimulated-Raman orbital-qubit simulator and pulse optimizer"};
  app.require_subcommand(1);

  const std::vector<std::string> commands = {
      "rabi",   "map",        "delay",      "ramsey",    "decay",
      "phase-area", "t1",     "noise-mc",   "high-orbital", "calibrate",
      "synthesize", "validate"};

  CommonOpts opts;
  std::string chosen;
  for (const auto& name : commands) {
    CLI::App* sub = app.add_subcommand(name, "");
    sub->add_option("-c,--config", opts.config, "JSON run configuration");
    sub->add_option("-s,--set", opts.sets,
                    "override a config field, key.path=value (repeatable)");
    sub->add_option("-o,--output-dir", opts.output_dir, "output directory");
    sub->add_option("--seed", opts.seed, "RNG seed");
    sub->add_option("--format", opts.format, "csv or json");
    sub->add_option("--cal", opts.cal_file, "calibration file (synthesize, etc.)");
    sub->callback([&chosen, name]() { chosen = name; });
  }

  CLI11_PARSE(app, argc, argv);
  return execute(chosen, opts);
}
