#pragma once

// Command-line front end. Exit codes: 0 success, 1 usage error, 2 validation
// error, 3 numerical error, 4 I/O error; each failure is reported on the error
// stream with the matching prefix ("usage error:", "validation error:",
// "numerical error:", "io error:").

#include <iosfwd>
#include <string>
#include <vector>

namespace sdosc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitIo = 4;

/// args excludes the program name.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sdosc::cli
