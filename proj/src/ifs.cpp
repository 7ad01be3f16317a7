#include "vgforge/ifs.hpp"

#include <algorithm>
#include <cmath>

#include "vgforge/error.hpp"
#include "vgforge/rng.hpp"

namespace vgforge::ifs {

double AffineTransform::determinant() const noexcept {
  const auto& m = matrix;
  return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
         m[2] * (m[3] * m[7] - m[4] * m[6]);
}

bool AffineTransform::is_contraction() const noexcept {
  const auto& m = matrix;
  // a = I - m^T m, symmetric
  double a[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double mtm = m[i] * m[j] + m[3 + i] * m[3 + j] + m[6 + i] * m[6 + j];
      a[i][j] = (i == j ? 1.0 : 0.0) - mtm;
    }
  const double minor1 = a[0][0];
  const double minor2 = a[0][0] * a[1][1] - a[0][1] * a[1][0];
  const double minor3 = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
                        a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
                        a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
  return minor1 > 0.0 && minor2 > 0.0 && minor3 > 0.0;
}

std::vector<double> determinant_probabilities(const std::vector<AffineTransform>& transforms) {
  const std::size_t n = transforms.size();
  std::vector<double> probs(n, 0.0);
  double total = 0.0;
  bool any_nonzero = false;
  for (std::size_t i = 0; i < n; ++i) {
    probs[i] = std::abs(transforms[i].determinant());
    if (probs[i] >= kDeterminantFloor) any_nonzero = true;
    total += probs[i];
  }
  if (!any_nonzero) {
    std::fill(probs.begin(), probs.end(), 1.0 / static_cast<double>(n));
    return probs;
  }
  for (double& p : probs) p /= total;
  return probs;
}

IfsParams sample_ifs(std::uint64_t seed, std::size_t n, bool contractive, double lo, double hi) {
  if (n < 2) throw InvalidParameter("sample_ifs: need at least 2 transforms, got " + std::to_string(n));
  if (!(lo < hi)) throw InvalidParameter("sample_ifs: empty sampling range");
  Rng rng(seed);
  IfsParams out;
  out.category_seed = seed;
  out.transforms.resize(n);
  for (auto& t : out.transforms) {
    do {
      for (double& v : t.matrix) v = rng.uniform(lo, hi);
      for (double& v : t.bias) v = rng.uniform(lo, hi);
    } while (contractive && !t.is_contraction());
  }
  out.probs = determinant_probabilities(out.transforms);
  return out;
}

PointCloud chaos_game(const IfsParams& ifs, std::size_t T, std::uint64_t run_seed,
                      std::vector<std::uint32_t>* choices) {
  if (T < 1) throw InvalidParameter("chaos_game: T must be >= 1");
  if (ifs.transforms.empty() || ifs.transforms.size() != ifs.probs.size())
    throw InvalidParameter("chaos_game: transforms and probs must be non-empty and equal length");

  Rng rng(run_seed);
  PointCloud pc;
  pc.points.resize(T);
  pc.points[0] = {0.0, 0.0, 0.0};
  if (choices) {
    choices->clear();
    choices->reserve(T - 1);
  }
  for (std::size_t t = 1; t < T; ++t) {
    const std::size_t i = rng.categorical(ifs.probs);
    const Vec3 x = ifs.transforms[i].apply(pc.points[t - 1]);
    if (!std::isfinite(x[0]) || !std::isfinite(x[1]) || !std::isfinite(x[2]))
      throw DivergenceError(t);
    pc.points[t] = x;
    if (choices) choices->push_back(static_cast<std::uint32_t>(i));
  }
  return pc;
}

PointCloud normalize_cloud(const PointCloud& pc) {
  PointCloud out;
  out.points.resize(pc.size());
  if (pc.empty()) return out;

  const Vec3& first = pc.points.front();
  const bool all_identical =
      std::all_of(pc.points.begin(), pc.points.end(), [&](const Vec3& p) { return p == first; });
  if (all_identical) return out;  // zero-initialised

  Vec3 centroid{0.0, 0.0, 0.0};
  for (const auto& p : pc.points)
    for (int a = 0; a < 3; ++a) centroid[a] += p[a];
  for (double& c : centroid) c /= static_cast<double>(pc.size());

  double max_abs = 0.0;
  for (std::size_t i = 0; i < pc.size(); ++i) {
    for (int a = 0; a < 3; ++a) {
      out.points[i][a] = pc.points[i][a] - centroid[a];
      max_abs = std::max(max_abs, std::abs(out.points[i][a]));
    }
  }
  if (max_abs == 0.0) return out;
  for (auto& p : out.points)
    for (double& v : p) v /= max_abs;
  return out;
}

Vec3 axis_variance(const PointCloud& pc) {
  Vec3 var{0.0, 0.0, 0.0};
  if (pc.empty()) return var;
  const double n = static_cast<double>(pc.size());
  Vec3 mean{0.0, 0.0, 0.0};
  for (const auto& p : pc.points)
    for (int a = 0; a < 3; ++a) mean[a] += p[a];
  for (double& m : mean) m /= n;
  for (const auto& p : pc.points)
    for (int a = 0; a < 3; ++a) var[a] += (p[a] - mean[a]) * (p[a] - mean[a]);
  for (double& v : var) v /= n;
  return var;
}

bool variance_filter(const PointCloud& pc, double threshold) {
  const Vec3 var = axis_variance(pc);
  return var[0] > threshold && var[1] > threshold && var[2] > threshold;
}

std::size_t mix_count(std::size_t T, double ratio) {
  return static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(T)));
}

PointCloud fractal_noise_mix(const PointCloud& base, const PointCloud& donor, double ratio,
                             std::uint64_t mix_seed) {
  if (!(ratio > 0.0 && ratio < 1.0))
    throw InvalidParameter("fractal_noise_mix: ratio must lie in (0, 1)");
  if (base.empty()) throw InvalidParameter("fractal_noise_mix: empty base cloud");
  const std::size_t T = base.size();
  const std::size_t k = mix_count(T, ratio);
  if (donor.size() < k)
    throw InvalidParameter("fractal_noise_mix: donor has " + std::to_string(donor.size()) +
                           " points, need " + std::to_string(k));

  Rng rng(mix_seed);
  const auto donor_idx = rng.sample_without_replacement(donor.size(), k);
  std::vector<Vec3> combined;
  combined.reserve(T + k);
  combined.insert(combined.end(), base.points.begin(), base.points.end());
  for (std::size_t j : donor_idx) combined.push_back(donor.points[j]);

  // Choosing the k points to drop is the same as keeping a uniform T-subset.
  std::vector<bool> dropped(combined.size(), false);
  for (std::size_t j : rng.sample_without_replacement(combined.size(), k)) dropped[j] = true;

  PointCloud out;
  out.points.reserve(T);
  for (std::size_t j = 0; j < combined.size(); ++j)
    if (!dropped[j]) out.points.push_back(combined[j]);
  return out;
}

}  // namespace vgforge::ifs
