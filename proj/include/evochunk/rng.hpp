#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace evochunk {

// Deterministic random source. mt19937_64 raw output is fixed by the
// standard; the distribution helpers below are implemented here rather
// than with std:: distributions so that streams are identical across
// standard libraries and across runs with different thread counts.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

  // Uniform in [lo, hi] inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo + 1)));
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Stable seed derivation for (stream, generation, slot) style sub-streams.
  static std::uint64_t mix(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0);

 private:
  std::mt19937_64 engine_;
};

}  // namespace evochunk
