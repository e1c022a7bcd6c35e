#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gasg::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

/// Runs `gasg21 <args...>` (args excludes the program name) with the given
/// streams and returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gasg::cli
