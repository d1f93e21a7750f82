#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kgned::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kRuntimeAbort = 3 };

/// Environment variables named KGNED_<SUBCOMMAND>_<OPTION> (upper case,
/// dashes as underscores) supply option values that neither a flag nor the
/// --config file set.
inline constexpr const char* kEnvPrefix = "KGNED_";

/// Runs one invocation. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

}  // namespace kgned::cli
