#ifndef DNN_RNG_HPP
#define DNN_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>

namespace dnn {

// SplitMix64 finalizer. Used to turn (seed, stream name) into independent
// engine seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// FNV-1a, for hashing stream names.
constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Random stream used throughout the library: a 64-bit Mersenne Twister whose
/// seed is derived from a master seed and a stream name.
///
/// Every component that consumes randomness (train/test split, MCMC chain,
/// auxiliary Gibbs draws) gets its own named sub-stream, so adding or
/// reordering draws in one component never perturbs another.
class Rng {
 public:
  using engine_type = std::mt19937_64;

  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  /// Independent stream for a named component of a run seeded with `seed`.
  static Rng stream(std::uint64_t seed, std::string_view name) {
    return Rng(splitmix64(seed) ^ fnv1a(name));
  }

  /// Child stream derived from this one's next output.
  Rng split(std::string_view name) { return Rng(engine_() ^ fnv1a(name)); }

  /// Uniform on [0, 1).
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

  double normal(double mean, double sd) {
    return std::normal_distribution<double>(mean, sd)(engine_);
  }

  /// Uniform integer on [lo, hi].
  template <typename Int>
  Int uniform_int(Int lo, Int hi) {
    return std::uniform_int_distribution<Int>(lo, hi)(engine_);
  }

  engine_type& engine() noexcept { return engine_; }

 private:
  engine_type engine_;
};

}  // namespace dnn

#endif  // DNN_RNG_HPP
