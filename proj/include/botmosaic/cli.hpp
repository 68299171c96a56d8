#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace botmosaic::cli {

/// Exit codes: 0 success, 1 runtime or validation error, 2 usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace botmosaic::cli
