#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pfscale::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitFailure = 2;

/// Entry point behind the pfscale executable. args excludes the program
/// name. Returns 0 on success, 1 on a usage error, 2 on a runtime or case
/// failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pfscale::cli
