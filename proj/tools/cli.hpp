#pragma once

#include <string>
#include <vector>

#include "polyreg/io.hpp"

namespace polyreg::cli {

enum ExitCode : int {
  kOk = 0,
  kSelftestFailed = 1,
  kParseError = 2,
  kPreconditionError = 3,
  kDivergence = 4,
};

/// Runs the command line `polyreg <args...>` and returns the process exit code.
int run(const std::vector<std::string>& args);

struct SelftestOptions {
  std::string frame_file;  // optional frame JSON checked alongside the presets
  std::uint64_t seed = 0;
};

/// Runs every invariant group. Returns the JSON report; `passed` is set iff
/// every group passed.
io::Json run_selftest(const SelftestOptions& options, bool& passed);

}  // namespace polyreg::cli
