#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace metafill::cli {

// Exit statuses.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitTransport = 3;

// Runs one subcommand. `args` excludes the program name. Errors are reported
// on `err` as a single line "ERROR <status>: <message>".
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace metafill::cli
