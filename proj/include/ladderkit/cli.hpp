#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ladderkit {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitBackend = 2;
inline constexpr int kExitUsage = 64;

/// Runs one command line (program name excluded) and returns the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::string version_string();

}  // namespace ladderkit
