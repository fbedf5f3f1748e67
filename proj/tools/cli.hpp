#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qtomo::cli {

enum ExitCode : int {
  kSuccess = 0,
  kRuntimeFailure = 1,
  kUsageError = 2,
  kNotConverged = 3,
};

/// Runs the `qtomo` command line. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qtomo::cli
