#pragma once

// The mlatsim command line: protocol1, protocol2 and edlen-budget.

#include <iosfwd>
#include <string>
#include <vector>

namespace mlat::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kDomainError = 3,
  kSolverInvalid = 4,
  kIoError = 5,
};

/// Runs one command. `args` excludes the program name. Normal output goes
/// to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

/// "A..B", "B..A" or "A" to an ascending list. Throws ConfigError.
std::vector<int> parse_digits_range(const std::string& text);

/// Text of the bundled configs/table1.cfg, compiled in.
const std::string& bundled_table1_config();

}  // namespace mlat::cli
