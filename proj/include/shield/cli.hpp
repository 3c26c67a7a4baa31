#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace shield::cli {

// Entry point shared by the binary and the tests. args excludes the program
// name. Exit codes: 0 ok, 2 usage/config error, 3 infeasible, 4 internal.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace shield::cli
