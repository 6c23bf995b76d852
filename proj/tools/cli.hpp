#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace epl::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumerical = 2;

/// Runs one command line (args excludes the program name). Reports go to
/// `out`, diagnostics and usage errors to `err`.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace epl::cli
