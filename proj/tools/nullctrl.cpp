#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "nullctrl/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"nullctrl: moment-method null controls for degenerate/singular parabolic problems"};
  app.require_subcommand(1);

  std::string config_path, mode, out_dir;
  CLI::App* run = app.add_subcommand("run", "run a pipeline from an INI-style config");
  run->add_option("config", config_path, "config file")->required();
  run->add_option("--mode", mode, "spectrum | family | control | bounds | sweep (overrides run.mode)");
  run->add_option("--out", out_dir, "output directory (overrides output.dir)");

  CLI::App* check = app.add_subcommand("check", "run the invariant suite on the built-in config matrix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*check) {
      int failed = 0;
      for (const auto& c : nullctrl::run_checks(std::cout)) failed += !c.passed;
      std::cout << (failed ? "check: " + std::to_string(failed) + " failure(s)" : std::string("check: all passed")) << "\n";
      return failed ? 3 : 0;
    }
    nullctrl::RunConfig rc = nullctrl::load_config(config_path);
    if (!mode.empty()) rc.mode = nullctrl::mode_from_string(mode);
    if (!out_dir.empty()) rc.output_dir = out_dir;
    nullctrl::run(rc, std::cerr);
    return 0;
  } catch (const nullctrl::ConfigError& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return 2;
  } catch (const nullctrl::StageError& e) {
    std::cerr << "numerical failure in stage " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
}
