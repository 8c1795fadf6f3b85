#include "naswot/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace naswot {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t salt) noexcept {
  return splitmix64(splitmix64(master) ^ splitmix64(salt * 0xD1B54A32D192ED03ULL));
}

std::uint64_t derive_seed(std::uint64_t master, SeedStream stream) noexcept {
  return derive_seed(master, static_cast<std::uint64_t>(stream));
}

std::uint64_t Rng::uniform_index(std::uint64_t bound) {
  if (bound == 0) {
    throw std::invalid_argument("Rng::uniform_index: bound must be positive");
  }
  // Rejection sampling on the top of the range removes modulo bias.
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
  std::uint64_t r = engine_();
  while (r >= limit) r = engine_();
  return r % bound;
}

double Rng::uniform01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  // u1 in (0, 1] keeps the log finite.
  const double u1 = 1.0 - uniform01();
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace naswot
