#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace surmr::cli {

// Runs one command line (args[0] is the program name). Returns the process
// exit code: 0 on full success, nonzero otherwise. Diagnostics go to `err`,
// the resolved configuration and summaries to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Environment variable naming a run-config file used when --config is absent.
inline constexpr const char* kConfigEnv = "SURMR_CONFIG";

}  // namespace surmr::cli
