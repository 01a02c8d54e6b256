#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace confound {

// Command-line front end, callable in-process for tests. `args` excludes the
// program name. Returns 0 on success, 2 on usage errors, 3 on data errors
// (unreadable files, unmet context requirements, estimation failures).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run_cli(int argc, char** argv);

}  // namespace confound
