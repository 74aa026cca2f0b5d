#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mandible::cli {

enum ExitCode : int {
    kOk = 0,
    kInputError = 2,
    kComputeError = 3,
    kVerdictFail = 4,
};

// Runs one command line (args excludes the program name). Normal output goes
// to out, diagnostics to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mandible::cli
