#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace naswot {

// Independent seed streams derived from one master seed. Architecture
// sampling, weight initialisation and data sampling each get their own
// stream so that ablations can vary exactly one of them.
enum class SeedStream : std::uint64_t {
  kArchitecture = 1,
  kWeightInit = 2,
  kData = 3,
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;
std::uint64_t derive_seed(std::uint64_t master, SeedStream stream) noexcept;
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t salt) noexcept;

// Seeded random stream. The engine is std::mt19937_64; the distributions
// are implemented here rather than with <random>'s distribution classes,
// whose output is implementation-defined, so frozen fixtures hold on every
// standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t uniform_index(std::uint64_t bound);

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01();

  // Standard normal variate (Box-Muller, one value per call).
  double normal();

 private:
  std::mt19937_64 engine_;
};

}  // namespace naswot
