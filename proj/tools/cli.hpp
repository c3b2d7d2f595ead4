#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace polyproc::cli {

enum ExitCode : int { kPass = 0, kValidationFailure = 1, kInputError = 2 };

/// Runs one command line (without the program name). The JSON report goes to
/// `out` as a single line, and only once the command has succeeded;
/// diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace polyproc::cli
