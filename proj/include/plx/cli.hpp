#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace plx::cli {

enum ExitCode { kOk = 0, kRuntimeError = 1, kUsageError = 2 };

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace plx::cli
