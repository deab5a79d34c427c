#pragma once

// The fsk command line. Every verdict comes from the corresponding library
// call; this layer only resolves names, formats output and maps exit codes.

#include <iosfwd>
#include <string>
#include <vector>

namespace fsk {

enum ExitCode : int {
    kClean = 0,      // independent / before / separated / suite clean
    kViolation = 1,  // dependent / not before / connected / suite found a violation
    kUsage = 2,      // bad arguments or model
    kCapacity = 3,   // space or history too large
};

/// args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fsk
