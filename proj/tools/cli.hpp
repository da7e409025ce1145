#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace certbayes::cli {

/**
 * Runs the command line in-process. `args` excludes the program name.
 * Exit codes: 0 success, 1 usage or IO error, 2 precondition violation,
 * 3 sampler divergence.
 */
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace certbayes::cli
