#pragma once

#include <ostream>
#include <span>
#include <string>

namespace su2lab {

/// Exit statuses of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitRuntime = 1, kExitUsage = 2 };

/// Runs one `su2lab` invocation. `args` excludes the program name. Data goes
/// to `out` (or the --out file), diagnostics to `err`.
int run_command(std::span<const std::string> args, std::ostream& out,
                std::ostream& err);

}  // namespace su2lab
