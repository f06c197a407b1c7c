#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hga::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

inline constexpr const char* kVersion = "hga 0.1.0";

// Entry point behind the `hga` binary. `args` excludes the program name.
// Subcommands: synth, train, eval, predict, gradcheck, sweep-b, compare-heads.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hga::cli
