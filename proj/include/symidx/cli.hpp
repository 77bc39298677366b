#pragma once

#include <string>
#include <vector>

namespace symidx {

/// Command-line driver. Exit codes: 0 success, 2 malformed input,
/// 3 stabilization failure, 4 violated mathematical precondition,
/// 1 other runtime failure.
int run_cli(int argc, const char* const* argv);

/// Convenience overload for in-process invocation; `args` excludes the
/// program name.
int run_cli(const std::vector<std::string>& args);

}  // namespace symidx
