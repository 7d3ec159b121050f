// The `pedinav` command-line front end.

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pedinav::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitNumerical = 2;

/// Runs one command. args[0] is the program name. The JSON report goes to
/// `out` (and to --report when given); diagnostics go to `err`.
/// Returns 0 on success, 1 on invalid input or configuration, 2 when a
/// numerical-health check fails.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pedinav::cli
