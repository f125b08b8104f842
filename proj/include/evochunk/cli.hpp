#pragma once

namespace evochunk {

// Dispatches the evochunk subcommands. Exit codes: 0 success, 1 usage error,
// 2 data error (unreadable/invalid input).
int run_cli(int argc, const char* const* argv);

}  // namespace evochunk
