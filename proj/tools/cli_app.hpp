#ifndef TAVIE_TOOLS_CLI_APP_HPP
#define TAVIE_TOOLS_CLI_APP_HPP

#include <string>
#include <vector>

namespace tavie::cli {

/// Runs one CLI invocation; args excludes the program name.
/// Exit codes: 0 success, 1 domain/data error, 2 usage error.
int run(const std::vector<std::string>& args);
int run(int argc, const char* const* argv);

}  // namespace tavie::cli

#endif  // TAVIE_TOOLS_CLI_APP_HPP
