#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace posekit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumerical = 3;

/// Runs one invocation. `args` excludes the program name. Data goes to `out`
/// (or files), diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace posekit::cli
