#pragma once

#include <iosfwd>

namespace rpe {

/// Exit codes of the command-line front end.
enum ExitCode : int {
  kExitOk = 0,
  kExitInputError = 1,
  kExitCheckFailed = 2,
  kExitNotConverged = 3,
};

/// Parses argv and runs one command, writing the report to `out` and
/// diagnostics to `err`. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rpe
