#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace bdc::cli {

enum ExitCode : int {
    ok = 0,
    usage_error = 1,
    data_error = 2,
    numerical_error = 3,
};

/// Runs one invocation. `args` excludes the program name. Resolved config and
/// summaries go to `out`; failures print one "error: ..." line to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace bdc::cli
