#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hrc::cli {

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kUsage = 2,
    kIoError = 3,
    kCorrupt = 4,
};

/// Runs the hrc command line. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

} // namespace hrc::cli
