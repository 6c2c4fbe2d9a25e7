#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace nmr::cli {

/// Exit code plus the machine-readable summary of one command.  Exit code 0
/// means every output was written.
struct CommandResult {
  int exit_code = 0;
  nlohmann::json summary = nlohmann::json::object();
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Parses and runs one command line (argv[0] is the program name).  Human
/// messages go to `out` / `err`; with --json the summary is printed to `out`
/// as a single JSON object instead.
CommandResult run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv);

}  // namespace nmr::cli
