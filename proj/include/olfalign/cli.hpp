#pragma once

#include <string>
#include <vector>

namespace olfalign::cli {

/// Exit codes: 0 success, 1 runtime or validation failure, 2 usage error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs one subcommand. `args[0]` is the program name.
int execute(const std::vector<std::string>& args);

}  // namespace olfalign::cli
