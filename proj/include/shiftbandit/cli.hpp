#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace shiftbandit {

/// Exit codes of the command-line tool.
enum ExitCode : int { exit_ok = 0, exit_runtime = 1, exit_usage = 2 };

/// Entry point of the `shiftbandit` tool. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace shiftbandit
