#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rrpipe::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

/// Entry point behind the `rrpipe` binary. `args` excludes the program name.
/// Machine-readable output goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rrpipe::cli
