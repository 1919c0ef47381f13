#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "nullctrl/config.hpp"

namespace nullctrl {

/// Runs one mode and writes its artifacts under rc.output_dir. Throws ConfigError for
/// invalid input and StageError (or other exceptions) for numerical failures.
void run(const RunConfig& rc, std::ostream& log);

struct CheckLine {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double limit = 0.0;
};

/// Invariant suite over a fixed matrix of configurations.
std::vector<CheckLine> run_checks(std::ostream& log);

/// Worker count for sweeps: hardware concurrency capped by NULLCTRL_THREADS.
int worker_count(int jobs);

}  // namespace nullctrl
