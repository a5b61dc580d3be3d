#pragma once

// Command-line front end. Exit codes: 0 success, 1 runtime failure (or a
// failed bound check), 2 validation failure.

#include <iosfwd>

namespace klasian::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitValidation = 2;

/// Parses argv and runs a subcommand; results go to `out`, errors to `err`
/// as one JSON line.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace klasian::cli
