#pragma once

#include <iosfwd>

namespace migedu {

/// Exit codes of the command-line front end.
enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitValidation = 2,
    kExitInsufficientData = 3,
    kExitFixtureFailure = 4,
};

/// Parses argv, runs one subcommand, writes results to `out` (unless
/// --output is given) and diagnostics to `err`.
int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace migedu
