#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace vcount {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

// Runs one command line (without the program name). Reports go to `out`,
// diagnostics to `err`; returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vcount
