#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace markov {

/// Exit codes of the command-line tool.
enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitData = 2,
    kExitInternal = 3,
};

/// Runs the tool with `args` (program name excluded), writing normal output
/// to `out` and diagnostics to `err`. Never throws.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace markov
