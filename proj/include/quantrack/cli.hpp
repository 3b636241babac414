#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace quantrack {

/// Process exit statuses of the command-line tool.
enum ExitStatus : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitUsage = 2,
  kExitFormat = 3,
  kExitConstraint = 4,
  kExitIo = 5,
};

/// Runs one `quantrack` subcommand (gen, track, bench, sweep, detect, score).
/// `args` excludes the program name. "-" as an input or output path means
/// `in` or `out`. Diagnostics are written to `err` as a single line.
int cli_main(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
             std::ostream& err);

}  // namespace quantrack
