#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace l1kpca::cli {

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kDataError = 3,
  kNumericalError = 4,
};

/// Runs one command line. `args` excludes the program name. Results go to
/// `out` (or the --output file), diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace l1kpca::cli
