#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace lacuna {

// Exit codes of run_command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitVerifyFailed = 1;
inline constexpr int kExitError = 2;

// Subcommands: construct | verify | export | presets. `args` excludes the
// program name. Failures are written to `err` as one JSON line
// {"error": code, "detail": text}.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lacuna
