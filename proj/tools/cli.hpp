#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mwsq::cli {

enum ExitCode { kPass = 0, kVerifierFailure = 1, kInputError = 2, kCalibrationFailure = 3 };

/// Parses and runs one `mwsq` invocation. argv[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mwsq::cli
