#pragma once

#include <string>
#include <vector>

namespace canlearn::cli {

// argv-style arguments without the program name. Returns the process exit
// code: 0 success, 2 usage error, 3 I/O or data error, 4 solver
// non-convergence (solve-local only; the row is still written).
int run_cli(const std::vector<std::string>& args);

}  // namespace canlearn::cli
