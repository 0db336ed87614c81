#ifndef TCGAN_TOOLS_CLI_HPP
#define TCGAN_TOOLS_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace tcgan::cli {

enum ExitCode : int { kOk = 0, kInternal = 1, kUsage = 2, kData = 3, kDivergence = 4 };

/// Runs one command line (args excludes the program name) and returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tcgan::cli

#endif  // TCGAN_TOOLS_CLI_HPP
