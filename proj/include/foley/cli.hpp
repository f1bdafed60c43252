#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace foley::cli {

/// Runs one `foley_rms` command line (program name excluded) and returns its
/// exit status: 0 on success, 1 for I/O or metric failures, 2 for usage or
/// configuration errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace foley::cli
