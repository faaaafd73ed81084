#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace truncvol {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kExitIo = 4;

// Parses argv-style arguments (args[0] is the program name) and runs the
// chosen subcommand. Errors go to `err` as one line.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace truncvol
