#pragma once

#include <ostream>

namespace hifu::cli {

enum ExitCode : int {
    kSuccess = 0,
    kUsage = 1,
    kRuntime = 2,
    kVerifyFailed = 3,
};

/// Entry point of the `hifu` executable. Writes normal output to `out` and
/// diagnostics to `err`; returns the process exit code.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hifu::cli
