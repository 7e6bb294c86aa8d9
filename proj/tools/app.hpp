#pragma once

// Command-line front end. run() is the whole program minus process exit so
// tests can drive it in-process.

#include <ostream>
#include <string>
#include <vector>

namespace possio::app {

/// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;  ///< verify: a property check failed
inline constexpr int kExitConfig = 2;
inline constexpr int kExitCharacteristic = 3;
inline constexpr int kExitConvergence = 4;

/// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace possio::app
