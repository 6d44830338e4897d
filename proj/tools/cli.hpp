#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace causegen::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitGenerationError = 1;
inline constexpr int kExitUsageError = 2;

/// Environment variable naming the directory used when --out is omitted.
inline constexpr const char* kOutputDirEnv = "CAUSEGEN_OUTPUT_DIR";

/// Runs a command line; args[0] is the program name. Data goes to files or
/// `out`, diagnostics and progress to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace causegen::cli
