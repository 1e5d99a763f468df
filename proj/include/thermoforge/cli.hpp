#pragma once

#include <ostream>

namespace thermoforge {

// Process exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitParse = 2,
  kExitDomain = 3,
  kExitCapacity = 4,
  kExitCoherence = 5,
};

/// Runs the command-line tool. The JSON report goes to `out`, diagnostics to
/// `err`; the return value is the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace thermoforge
