#pragma once

#include <iosfwd>

namespace edgeroute {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;
inline constexpr int kExitUsage = 64;

/// Entry point of the `edgeroute` tool. Subcommands: profile
/// {validate,pareto,seed}, dataset {build,import,synth}, run, sweep, serve,
/// report summarize.
int cli_run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace edgeroute
