#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qecho::cli {

// Exit codes: 0 ok, 2 usage or config, 3 resource guard, 4 numerical failure.
enum ExitCode : int { kOk = 0, kUsage = 2, kResources = 3, kNumerical = 4 };

// Output directory used when a config has none.
inline constexpr const char* kOutputDirEnv = "QECHO_OUTPUT_DIR";

// Dispatches `run`, `fit`, `plan`, `report`. args excludes the program name.
int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qecho::cli
