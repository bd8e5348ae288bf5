#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace panelcast::app {

enum ExitCode : int {
    kOk = 0,
    kConfigError = 2,
    kDataError = 3,
    kRuntimeError = 4,
};

inline constexpr const char* kVersion = "1.0.0";

// Entry point of the command-line tool. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace panelcast::app
