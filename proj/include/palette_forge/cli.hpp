#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace palette_forge::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;       // I/O, decode and data errors
inline constexpr int kExitUsage = 2;         // unknown subcommand or bad flags
inline constexpr int kExitCheckFailed = 3;   // `oracle` found a mismatch

/// Runs one invocation. argv[0] is the program name.
int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace palette_forge::cli
