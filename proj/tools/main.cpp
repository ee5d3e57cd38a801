// Command-line front end: run one experiment, sweep navigation times, or
// validate a model file.  Exit codes: 0 success, 1 usage error, 2 run
// failure, 3 validation failure.

#include "sloshfree/sloshfree.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

int main(int argc, char** argv) {
  CLI::App app{"slosh-free trajectory tracking benchmark"};
  app.require_subcommand(0, 1);

  std::string config_path;
  std::string out_dir = "out";
  std::string mode_str;
  std::vector<double> times;
  unsigned workers = 0;  // 0 = hardware concurrency
  std::string model_path;

  CLI::App* run = app.add_subcommand("run", "execute one closed-loop run");
  run->add_option("--config", config_path, "experiment config (JSON)")->required();
  run->add_option("--out", out_dir, "output directory (default: out)");
  run->add_option("--mode", mode_str, "override the config mode (slosh_free|baseline)");

  CLI::App* sweep = app.add_subcommand("sweep", "sweep navigation times for one config");
  sweep->add_option("--config", config_path, "experiment config (JSON)")->required();
  sweep->add_option("--times", times, "navigation times to sweep [s]")
      ->required()
      ->delimiter(',');
  sweep->add_option("--out", out_dir, "output directory (default: out)");
  sweep->add_option("--mode", mode_str, "slosh_free, baseline, or both (default: both)");
  sweep->add_option("--workers", workers, "parallel runs (default: hardware concurrency)");

  CLI::App* validate = app.add_subcommand("validate", "self-check a model file");
  validate->add_option("--model", model_path, "kinematic model (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return sloshfree::kExitUsage;
  }

  try {
    if (run->parsed()) {
      std::optional<sloshfree::ControlMode> mode;
      if (!mode_str.empty()) mode = sloshfree::parse_mode(mode_str);
      return sloshfree::cmd_run(config_path, out_dir, mode);
    }
    if (sweep->parsed()) {
      std::vector<sloshfree::ControlMode> modes;
      if (mode_str.empty() || mode_str == "both") {
        modes = {sloshfree::ControlMode::slosh_free, sloshfree::ControlMode::upright_baseline};
      } else {
        modes = {sloshfree::parse_mode(mode_str)};
      }
      return sloshfree::cmd_sweep(config_path, out_dir, times, modes, workers);
    }
    if (validate->parsed()) return sloshfree::cmd_validate(model_path);
  } catch (const sloshfree::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return sloshfree::kExitUsage;
  }

  std::cout << app.help();
  return sloshfree::kExitUsage;
}
