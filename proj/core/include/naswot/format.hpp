#pragma once

#include <string>

namespace naswot {

// Shortest decimal form that round-trips to the same double.
std::string format_full(double value);

// Six significant digits, for human-facing output.
std::string format_short(double value);

}  // namespace naswot
