#include "naswot/format.hpp"

#include <array>
#include <charconv>
#include <cstdio>

namespace naswot {

std::string format_full(double value) {
  std::array<char, 64> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) return "nan";
  return std::string(buf.data(), end);
}

std::string format_short(double value) {
  std::array<char, 64> buf{};
  const int len = std::snprintf(buf.data(), buf.size(), "%.6g", value);
  return std::string(buf.data(), static_cast<std::size_t>(len));
}

}  // namespace naswot
