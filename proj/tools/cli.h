#pragma once

#include <string>
#include <vector>

namespace consensus::cli {

enum ExitCode { kSuccess = 0, kVerificationFailure = 1, kUsageError = 2, kOptimizationFailure = 3 };

/// Parses and runs one subcommand. args[0] is the program name.
int run(const std::vector<std::string>& args);

}  // namespace consensus::cli
