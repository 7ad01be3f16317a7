#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace vgforge {

/// splitmix64 finalizer; bijective 64-bit mix.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  return mix64(x + 0x9E3779B97F4A7C15ULL);
}

/// 64-bit FNV-1a over a role tag.
constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Stable per-record seed: hash of (global seed, role tag, a, b).
/// Independent of draw order, so any worker partition yields the same seeds.
std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view role, std::uint64_t a,
                          std::uint64_t b = 0) noexcept;

/// mt19937_64 with hand-written distribution mappings. The std:: distributions
/// are implementation-defined, so they would break cross-platform golden files.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Unbiased integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n);

  /// Index drawn from a discrete distribution given as probabilities summing to 1.
  std::size_t categorical(const std::vector<double>& probs);

  /// k distinct indices from [0, n) in draw order (partial Fisher-Yates).
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

  /// Uniform random permutation of [0, n).
  std::vector<std::size_t> permutation(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

/// First index i with u < cumulative(probs)[i]; falls back to the last index
/// with nonzero probability when rounding leaves u above the final sum.
std::size_t categorical_index(const std::vector<double>& probs, double u) noexcept;

}  // namespace vgforge
