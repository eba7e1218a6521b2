#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace canlearn::rng {

// splitmix64 finalizer; stable across platforms (pure integer ops).
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic seed derivation: absorbs each value into the state.
inline std::uint64_t derive(std::uint64_t seed, std::initializer_list<std::uint64_t> vals) {
  std::uint64_t x = splitmix64(seed);
  for (std::uint64_t v : vals) x = splitmix64(x ^ (v * 0x9e3779b97f4a7c15ULL));
  return x;
}

inline std::uint64_t derive(std::uint64_t seed, std::uint64_t a) { return derive(seed, {a}); }
inline std::uint64_t derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return derive(seed, {a, b});
}
inline std::uint64_t derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return derive(seed, {a, b, c});
}

// Stream tags keep unrelated consumers of one user seed statistically independent.
inline constexpr std::uint64_t kTagTrial = 0x747269616cULL;     // solver trials
inline constexpr std::uint64_t kTagEdge = 0x65646765ULL;        // search edge solves
inline constexpr std::uint64_t kTagSection = 0x73656374ULL;     // global sections
inline constexpr std::uint64_t kTagInstance = 0x696e7374ULL;    // planted instances
inline constexpr std::uint64_t kTagStructure = 0x73747275ULL;   // fallback structures

// Seeded generator with the few draw helpers the library needs.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }  // [0,1)
  // inclusive bounds
  std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi) {
    return std::uniform_int_distribution<std::uint64_t>(lo, hi)(engine_);
  }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace canlearn::rng
