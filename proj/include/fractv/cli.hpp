#pragma once

#include <iosfwd>

namespace fractv {

/// Exit codes of the command line tool.
enum ExitCode : int {
    kExitOk = 0,
    kExitValidation = 1,
    kExitNonConvergence = 2,
    kExitInvariant = 3,
};

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fractv
