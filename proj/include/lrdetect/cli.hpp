#pragma once

// Command-line front end. `run_cli` takes the arguments after the program
// name and returns the process exit status: 0 success, 1 runtime failure,
// 2 usage error. Failures print one line to `err`:
//   lrdetect: error code=<tag> message="<text>"

#include <iosfwd>
#include <string>
#include <vector>

namespace lrdetect {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace lrdetect
