#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tvvar {

// Runs one command. `args` excludes the program name. Exit codes:
// 0 ok, 1 eval criterion failed, 2 bad arguments, 3 bad data, 4 numerical failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace tvvar
