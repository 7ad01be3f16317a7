#include "vgforge/rng.hpp"

#include <numeric>
#include <utility>

namespace vgforge {

std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view role, std::uint64_t a,
                          std::uint64_t b) noexcept {
  std::uint64_t h = splitmix64(global_seed);
  h = splitmix64(h ^ fnv1a64(role));
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ b);
  return h;
}

std::uint64_t Rng::below(std::uint64_t n) {
  // Rejection on the top partial block keeps the result exactly uniform.
  const std::uint64_t limit = n * (UINT64_MAX / n);
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

std::size_t categorical_index(const std::vector<double>& probs, double u) noexcept {
  double cumulative = 0.0;
  std::size_t last_nonzero = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    last_nonzero = i;
    cumulative += probs[i];
    if (u < cumulative) return i;
  }
  return last_nonzero;
}

std::size_t Rng::categorical(const std::vector<double>& probs) {
  return categorical_index(probs, uniform());
}

std::vector<std::size_t> Rng::sample_without_replacement(std::size_t n, std::size_t k) {
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(below(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

std::vector<std::size_t> Rng::permutation(std::size_t n) { return sample_without_replacement(n, n); }

}  // namespace vgforge
