#pragma once

#include <iosfwd>

namespace berry::cli {

enum ExitCode : int { exit_ok = 0, exit_check_failed = 1, exit_config_error = 2 };

// Entry point of the berrylab tool. Writes human-readable output to `out`,
// diagnostics and usage to `err`.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace berry::cli
