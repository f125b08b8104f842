#include "evochunk/rng.hpp"

namespace evochunk {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t Rng::mix(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t h = splitmix64(a);
  h = splitmix64(h ^ (b + 0x9E3779B97F4A7C15ULL));
  h = splitmix64(h ^ (c + 0xC2B2AE3D27D4EB4FULL));
  return h;
}

}  // namespace evochunk
