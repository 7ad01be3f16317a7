#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace vgforge {

using Vec3 = std::array<double, 3>;

/// Ordered set of 3D coordinates.
struct PointCloud {
  std::vector<Vec3> points;

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }
};

namespace ifs {

inline constexpr std::size_t kDefaultTransforms = 7;
inline constexpr std::size_t kDefaultPoints = 8192;
inline constexpr double kDefaultVarianceThreshold = 0.05;
inline constexpr double kDefaultMixRatio = 0.2;
inline constexpr double kDeterminantFloor = 1e-12;

/// t(x) = matrix * x + bias, matrix row-major.
struct AffineTransform {
  std::array<double, 9> matrix{};
  Vec3 bias{};

  Vec3 apply(const Vec3& x) const noexcept {
    return {matrix[0] * x[0] + matrix[1] * x[1] + matrix[2] * x[2] + bias[0],
            matrix[3] * x[0] + matrix[4] * x[1] + matrix[5] * x[2] + bias[1],
            matrix[6] * x[0] + matrix[7] * x[1] + matrix[8] * x[2] + bias[2]};
  }

  double determinant() const noexcept;

  /// Spectral norm of `matrix` strictly below 1, i.e. I - r^T r positive definite
  /// (checked exactly with leading principal minors).
  bool is_contraction() const noexcept;
};

/// One fractal category's generator.
struct IfsParams {
  std::vector<AffineTransform> transforms;
  std::vector<double> probs;
  std::uint64_t category_seed = 0;

  std::size_t size() const noexcept { return transforms.size(); }
};

/// probs[i] = |det r_i| / sum_k |det r_k|; uniform when every |det| < 1e-12.
std::vector<double> determinant_probabilities(const std::vector<AffineTransform>& transforms);

/// Draws n transforms with all 12 entries U(lo, hi) in the order matrix
/// (row-major) then bias. With `contractive` set, a transform whose linear part
/// is not a strict contraction is redrawn whole. Throws InvalidParameter when n < 2.
IfsParams sample_ifs(std::uint64_t seed, std::size_t n = kDefaultTransforms, bool contractive = true,
                     double lo = -1.0, double hi = 1.0);

/// x_1 = origin, x_{t+1} = r_i x_t + b_i with i ~ probs. Returns exactly T points.
/// When `choices` is non-null it receives the T-1 selected transform indices.
/// Throws DivergenceError on the first non-finite coordinate.
PointCloud chaos_game(const IfsParams& ifs, std::size_t T, std::uint64_t run_seed,
                      std::vector<std::uint32_t>* choices = nullptr);

/// Zero centroid, max |coordinate| == 1. An all-identical cloud maps to zeros.
PointCloud normalize_cloud(const PointCloud& pc);

/// Population variance along x, y, z.
Vec3 axis_variance(const PointCloud& pc);

/// True iff every axis variance strictly exceeds the threshold.
bool variance_filter(const PointCloud& pc, double threshold = kDefaultVarianceThreshold);

/// Number of donor points injected: ceil(ratio * T).
std::size_t mix_count(std::size_t T, double ratio);

/// Appends ceil(ratio*T) donor points drawn without replacement, then keeps a
/// uniform T-subset of the combined cloud (original order preserved).
PointCloud fractal_noise_mix(const PointCloud& base, const PointCloud& donor, double ratio,
                             std::uint64_t mix_seed);

}  // namespace ifs
}  // namespace vgforge
