#pragma once

#include <ostream>

namespace evpirank {

// Exit codes: 0 success, 1 runtime failure, 2 usage error or unreadable input.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Entry point of the `evpirank` tool. Output files are written directly;
// human-readable summaries go to `out`, logs and diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace evpirank
