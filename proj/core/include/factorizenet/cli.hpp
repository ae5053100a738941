#pragma once

#include <string>
#include <vector>

namespace fznet {

/// Command-line entry point, exposed as a function so the CLI surface is
/// testable in-process. `args` excludes the program name.
/// Exit codes: 0 success, 1 runtime failure (including a partially failed
/// sweep), 2 usage error.
int cli_main(const std::vector<std::string>& args);

}  // namespace fznet
