#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace varcomp::cli {

enum ExitCode : int { kOk = 0, kInputError = 1, kCheckFailed = 3, kDivergent = 4 };

/// Runs one command (`args` excludes the program name) and returns its exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace varcomp::cli
