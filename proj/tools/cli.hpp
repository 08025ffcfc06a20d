#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace glassbox::cli {

enum ExitCode : int { kOk = 0, kInternalError = 1, kUsageError = 2 };

/// Runs one invocation of the command-line tool. args excludes the program
/// name. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace glassbox::cli
