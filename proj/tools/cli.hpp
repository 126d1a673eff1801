#pragma once

#include <string>
#include <vector>

namespace homtest::cli {

// Parse and dispatch; returns the process exit code. Declared here so the
// command implementations are testable without spawning the binary.
int run(const std::vector<std::string>& args);

}  // namespace homtest::cli
