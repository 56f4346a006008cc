#pragma once

namespace sf {

// Entry point of the sfcli tool. Returns 0 on success, 1 on a usage error and
// 2 when a command fails at run time.
int run_cli(int argc, const char* const* argv);

}  // namespace sf
