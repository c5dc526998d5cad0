#pragma once

#include <cstdint>

namespace cdrmob {

// splitmix64 (Steele, Lea, Flood 2014). Chosen because the update rule is a
// one-line public algorithm, so seeded outputs are reproducible across
// implementations and languages; manifests record the name.
inline constexpr char kRngAlgorithm[] = "splitmix64";

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1), 53 significant bits.
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n) by rejection; n > 0.
  std::uint64_t next_below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t v;
    do {
      v = next();
    } while (v >= limit);
    return v % n;
  }

 private:
  std::uint64_t state_;
};

// Independent substream k of a master seed: substream k is a splitmix64
// generator seeded with splitmix64(seed + (k+1) * gamma). Substreams can be
// consumed in any order, which makes per-subscriber generation parallel.
inline SplitMix64 substream(std::uint64_t seed, std::uint64_t ordinal) {
  SplitMix64 mixer(seed + (ordinal + 1) * 0x9E3779B97F4A7C15ULL);
  return SplitMix64(mixer.next());
}

}  // namespace cdrmob
