#pragma once

#include <string>
#include <vector>

namespace eunsim {

// Command line front end. Returns the process exit code: 0 on success, 1 on
// configuration errors (message on stderr), 2 when the scenario admits no
// feasible schedule.
int run_cli(const std::vector<std::string>& args);

}  // namespace eunsim
