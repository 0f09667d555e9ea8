#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace zefoz::cli {

/// Exit codes shared by every subcommand.
enum ExitCode : int { kSuccess = 0, kUsageError = 1, kNumericalFailure = 2 };

/// Runs the command line `args` (args[0] is the program name). Normal
/// output goes to `out` unless --out is given; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace zefoz::cli
