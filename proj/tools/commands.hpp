#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pblasso::cli {

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kInputError = 2,
    kNotConverged = 3,
};

/// Entry point shared by the executable and the tests. `args` excludes argv[0].
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pblasso::cli
