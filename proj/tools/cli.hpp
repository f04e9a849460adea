#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace exactreg::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kVerificationFailed = 1;
inline constexpr int kUsage = 2;

/// Runs one subcommand. `args` excludes the program name. JSON goes to `out`,
/// logs and usage text to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "2..6" or "2,3,4".
std::vector<int> parse_int_list(const std::string& text);
std::vector<double> parse_real_list(const std::string& text);

}  // namespace exactreg::cli
