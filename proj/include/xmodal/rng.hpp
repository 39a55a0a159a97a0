#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>

namespace xmodal {

// splitmix64 output function (Steele/Lea/Flood constants). Used both to
// expand a 64-bit seed into generator state and to derive independent
// per-stream child seeds, so parallel work never depends on scheduling order.
inline std::uint64_t splitmix64_at(std::uint64_t seed, std::uint64_t step) {
  std::uint64_t z = seed + (step + 1) * 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  // child seed = stream-th splitmix64 output of the master seed
  return splitmix64_at(master, stream);
}

// xoshiro256** by Blackman & Vigna (public-domain reference constants).
// Fixed here so seeded runs reproduce bit-for-bit across platforms and
// toolchains; std::mt19937 and friends give no such cross-build promise
// for the distributions layered on top.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : seed_(seed) {
    for (std::size_t i = 0; i < 4; ++i) s_[i] = splitmix64_at(seed, i);
  }

  std::uint64_t next() {
    const std::uint64_t result = std::rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = std::rotl(s_[3], 45);
    return result;
  }

  // uniform in [0,1) with 53 random bits
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // unbiased uniform integer in [0,n), n >= 1 (rejection on the top residue)
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % n;
    }
  }

  // independent child generator for stream `stream`
  Rng split(std::uint64_t stream) const { return Rng(derive_seed(seed_, stream)); }

  std::uint64_t seed() const { return seed_; }

private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> s_;
};

// Standard normal via Box-Muller. Hand-rolled because std::normal_distribution
// is not bit-reproducible across standard library implementations.
inline double next_gaussian(Rng& rng) {
  const double u1 = 1.0 - rng.next_double();  // (0,1]
  const double u2 = rng.next_double();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
}

}  // namespace xmodal
