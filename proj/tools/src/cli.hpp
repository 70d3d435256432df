#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace job2vec::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kInternal = 3 };

// Runs the job2vec command line with `args` (program name excluded). Results
// go to `out`, logs and diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace job2vec::cli
