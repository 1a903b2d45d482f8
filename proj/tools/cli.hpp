#pragma once

#include <iosfwd>

namespace lbk::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalidInput = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kExitProviderUnavailable = 4;
inline constexpr int kExitProviderFailure = 5;

/// Runs the command line with explicit streams so tests can drive it
/// in-process. Returns the exit code.
int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err);

}  // namespace lbk::cli
