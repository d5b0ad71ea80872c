#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace brwlab::cli {

enum ExitCode : int { ok = 0, config_error = 1, runtime_error = 2, check_failed = 3 };

/// Runs `brwlab <subcommand> [flags]`. args excludes the program name.
/// Data goes to `out` (or --out files), progress and errors to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace brwlab::cli
