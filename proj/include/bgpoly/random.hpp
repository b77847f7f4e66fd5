#pragma once

// Reproducible per-replica streams: seed = splitmix64 chain over
// (master, replica, role), feeding std::mt19937_64.

#include <cstdint>
#include <random>

namespace bgpoly {

enum class StreamRole : std::uint64_t { South = 1, West = 2, Bulk = 3, Aux = 4 };

/// One splitmix64 step (Steele, Lea, Flood 2014).
inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// splitmix64(splitmix64(splitmix64(master) ^ replica) ^ role)
inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t replica, StreamRole role) {
  return splitmix64(splitmix64(splitmix64(master) ^ replica) ^ static_cast<std::uint64_t>(role));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  Rng(std::uint64_t master, std::uint64_t replica, StreamRole role) : eng_(derive_seed(master, replica, role)) {}

  /// Uniform on the open interval (0, 1): ((x >> 11) + 0.5) * 2^-53.
  double uniform() { return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53; }

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace bgpoly
