#pragma once

// Named checks runnable from the command line and the operations each one
// exercises.

#include <functional>
#include <string>
#include <vector>

#include "config.hpp"

namespace qgibbs::cli {

struct CheckSpec {
  std::string id;
  std::string summary;
  std::vector<std::string> operations;  // library calls exercised
  bool sweep = false;                   // part of the `sweep` subcommand
  std::function<std::vector<CheckResult>(const ExperimentConfig&, double beta)> run;
};

const std::vector<CheckSpec>& registry();
const CheckSpec& find_check(const std::string& id);

/// Every check with sweep == true, or every check.
std::vector<std::string> default_checks(bool sweep_only);

}  // namespace qgibbs::cli
