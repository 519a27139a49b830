#pragma once

#include <string>
#include <vector>

namespace phdinf::cli {

/// Runs the `phdinf` command line. Returns the process exit code; errors are
/// written to stderr as one JSON object per line.
int run(int argc, const char* const* argv);

/// Convenience overload; `args` excludes the program name.
int run(const std::vector<std::string>& args);

}  // namespace phdinf::cli
