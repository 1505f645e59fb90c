#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace valueprobe::cli {

/// Parses `args` (without the program name), runs the command and returns the
/// process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace valueprobe::cli
