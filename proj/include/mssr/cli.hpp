#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mssr {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
    kExitOk = 0,
    kExitVerificationFailed = 1,
    kExitUsageOrIo = 2,
};

/// Entry point of the `mssr` tool: prepare-data, train, infer, evaluate,
/// grad-check. `argv[0]` is the program name.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Convenience overload; `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mssr
