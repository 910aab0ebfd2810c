#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace unetaf::cli {

enum ExitCode : int {
    kSuccess = 0,
    kInvariantFailure = 1,
    kUsageError = 2,
    kIoError = 3,
};

/// Runs one command line (without the program name) and returns the exit code.
/// Human-readable progress goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace unetaf::cli
