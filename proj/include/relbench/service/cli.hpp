#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace relbench::service {

// The relbench command line. `args` excludes the program name. Errors print
// one line `error: <code>: <message>` on `err` and return 1; usage errors
// return 2.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace relbench::service
