#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ocf::cli {

/// Runs the command line tool. `args` excludes the program name. Returns the
/// process exit status: 0 on success, 1 on runtime errors, 2 on usage errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ocf::cli
