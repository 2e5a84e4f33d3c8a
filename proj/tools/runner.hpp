#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "run_config.hpp"

namespace fbrsim::app {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitSolver = 3 };

// Runs the configured experiment and writes its tables plus metadata.json
// into out_dir. Solver failures still write metadata with "status": "failed".
int run_simulation(const RunConfig& config, const std::filesystem::path& out_dir,
                   std::ostream& log);

// Aligned difference table of `quantity` between two result directories,
// written to `out` as CSV. Throws ConfigError on missing files or grids that
// do not match.
void compare_runs(const std::filesystem::path& a, const std::filesystem::path& b,
                  const std::string& quantity, std::ostream& out);

}  // namespace fbrsim::app
