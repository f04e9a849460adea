#pragma once

#include <string>
#include <string_view>

namespace exactreg {

// 17 significant digits; infinities as `inf` / `-inf`, NaN as `nan`.
std::string format_double(double x);

// Inverse of format_double. Throws Error(InvalidInput) on trailing garbage.
double parse_double(std::string_view text);

}  // namespace exactreg
