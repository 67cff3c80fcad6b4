#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace psse::cli {

/// Run one command line (without the program name). Returns the process
/// exit code: 0 success, 1 numerical failure, 2 usage or configuration error.
int run(std::vector<std::string> const& args, std::ostream& out, std::ostream& err);

}  // namespace psse::cli
