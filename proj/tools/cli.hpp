#ifndef LOTCYCLE_TOOLS_CLI_HPP
#define LOTCYCLE_TOOLS_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace lotcycle::cli {

enum ExitCode {
    exit_ok = 0,
    exit_usage = 1,
    exit_infeasible = 2,
    exit_resource_cap = 3,
};

// args excludes the program name. Machine output goes to out, messages to err.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lotcycle::cli

#endif  // LOTCYCLE_TOOLS_CLI_HPP
