#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace detectkit::cli {

// Exit codes of the command-line tool.
enum ExitCode : int { kOk = 0, kConfigError = 2, kDataError = 3, kIoError = 4 };

// Entry point shared by main() and the tests. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace detectkit::cli
