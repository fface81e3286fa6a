#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bsde::cli {

enum ExitCode : int {
  kSuccess = 0,
  kValidationError = 1,
  kRuntimeFailure = 2,
};

// args excludes the program name. Subcommands: simulate, estimate,
// approximate, pde-solve, experiment, delta-study.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bsde::cli
