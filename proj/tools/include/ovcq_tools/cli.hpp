#pragma once

#include <iosfwd>

namespace ovcq::tools {

// Exit codes of the ovcq tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitVerifyFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitDataError = 3;

// Parses arguments, runs one subcommand and writes its JSON report to `out`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ovcq::tools
