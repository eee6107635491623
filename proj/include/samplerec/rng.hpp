#pragma once
//
// samplerec/rng.hpp
//
// Deterministic random number generation. Every randomized routine takes an
// explicit 64 bit seed and derives its stream here, so results are bit-exact
// reproducible across runs and platforms on the same build.
//

#include <cstdint>
#include <random>

namespace samplerec {

// Recorded in reports so a result can name the generator that produced it.
inline constexpr const char* kRngAlgorithm = "splitmix64+mt19937_64/u53";

// splitmix64 step (Steele, Lea, Flood). Used to whiten user seeds and to
// derive independent per-attempt streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Engine seed for retry number `attempt` (0 based) of a routine seeded with
// `seed`. Attempt 0 collapses to splitmix64(seed).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t attempt) {
  return splitmix64(seed ^ (attempt * 0xd1342543de82ef95ULL));
}

// mt19937_64 with uniforms taken from the top 53 bits. The standard pins the
// engine output exactly; the <random> distribution classes do not, hence the
// explicit mapping.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t engine_seed) : eng_(engine_seed) {}

  // Uniform on [0, 1) with 53 bit resolution.
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  std::uint64_t next_u64() { return eng_(); }

 private:
  std::mt19937_64 eng_;
};

}  // namespace samplerec
