#ifndef GTSIM_RNG_HPP
#define GTSIM_RNG_HPP

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

namespace gtsim::rng {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

/// splitmix64 output stage.
constexpr std::uint64_t mix_bits(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
  return mix_bits((h + kGolden) ^ mix_bits(v + kGolden));
}

/// Builds a stream key from identifying coordinates, e.g.
/// {seed, tag, node, round, step}. Order matters.
constexpr std::uint64_t stream_key(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x853c49e6748fea9bULL;
  for (std::uint64_t v : parts) h = hash_combine(h, v);
  return h;
}

/// Counter-based random stream: a pure function of (key, counter). Streams
/// with distinct keys are independent; re-creating a stream replays it
/// bit-identically, so results do not depend on evaluation order.
class CounterStream {
 public:
  explicit CounterStream(std::uint64_t key) : key_(key) {}

  std::uint64_t next_u64() { return mix_bits(key_ + kGolden * ++counter_); }

  /// Uniform in (0, 1]; never 0 so log() is safe.
  double uniform() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; the second draw of each pair is cached.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

  /// Uniform integer in [0, bound) via Lemire reduction (bound > 0).
  std::uint64_t bounded(std::uint64_t bound) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Purpose tags keeping data generation, gradient noise and shuffling on
// disjoint streams even under equal seeds.
inline constexpr std::uint64_t kTagData = 0x64617461ULL;
inline constexpr std::uint64_t kTagNoise = 0x6e6f6973ULL;
inline constexpr std::uint64_t kTagShuffle = 0x73687566ULL;

}  // namespace gtsim::rng

#endif  // GTSIM_RNG_HPP
