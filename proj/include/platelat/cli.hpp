#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace platelat {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitInvariant = 3,
  kExitStatistics = 4,
};

/// Entry point of the `platelat` command; messages go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& err);

}  // namespace platelat
