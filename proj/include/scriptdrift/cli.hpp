#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace scriptdrift {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kModelFormatVersion = 1;

/// Runs the command line tool. `args` excludes the program name.
/// Returns 0 on success, 1 on a runtime error, 2 on a usage error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace scriptdrift
