// Command-line harness: entangle, bell, dfs and calibrate-readout.
#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace iontrap {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Runs the harness on `args` (args[0] is the program name). The report JSON
/// goes to `out`, diagnostics to `err`. Returns 0 on success, 2 on a
/// configuration or usage error, 1 on a runtime failure.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int cli_main(int argc, char** argv);

}  // namespace iontrap
