#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mdm::app {

/// Exit codes of the command-line front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kExitFailure = 1;

/// Runs the command line `args` (program name excluded). Results go to
/// `out` unless --out names a file; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// FNV-1a 64-bit hash, used to fingerprint resolved configurations.
std::string fnv1a_hex(const std::string& text);

}  // namespace mdm::app
