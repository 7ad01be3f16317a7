#include "vgforge/perlin.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "vgforge/error.hpp"
#include "vgforge/rng.hpp"

namespace vgforge::perlin {

void PerlinParams::validate() const {
  if (grid_w < 2 || grid_h < 2) throw InvalidParameter("perlin: grid must be at least 2x2");
  if (!(frequency > 0.0) || !(scale > 0.0)) throw InvalidParameter("perlin: frequency and scale must be positive");
}

std::array<double, 2> lattice_gradient(std::uint64_t seed, long ix, long iy) noexcept {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(ix) * 0x8CB92BA72F3D8DD7ULL);
  h = splitmix64(h ^ static_cast<std::uint64_t>(iy) * 0xD6E8FEB86659FD93ULL);
  const double angle = 2.0 * std::numbers::pi * (static_cast<double>(h >> 11) * 0x1.0p-53);
  return {std::cos(angle), std::sin(angle)};
}

double gradient_noise(double u, double v, std::uint64_t seed) noexcept {
  const double fu = std::floor(u);
  const double fv = std::floor(v);
  const long ix = static_cast<long>(fu);
  const long iy = static_cast<long>(fv);
  const double dx = u - fu;
  const double dy = v - fv;
  auto corner = [&](long cx, long cy, double ox, double oy) {
    const auto g = lattice_gradient(seed, ix + cx, iy + cy);
    return g[0] * ox + g[1] * oy;
  };
  const double n00 = corner(0, 0, dx, dy);
  const double n10 = corner(1, 0, dx - 1.0, dy);
  const double n01 = corner(0, 1, dx, dy - 1.0);
  const double n11 = corner(1, 1, dx - 1.0, dy - 1.0);
  const double nx0 = n00 + dx * (n10 - n00);
  const double nx1 = n01 + dx * (n11 - n01);
  return nx0 + dy * (nx1 - nx0);
}

double sample(const PerlinParams& params, double x, double y) noexcept {
  return gradient_noise(params.frequency * x, params.frequency * y, params.category_seed);
}

HeightField perlin_2d(const PerlinParams& params) {
  params.validate();
  HeightField f{params.grid_w, params.grid_h, {}};
  f.values.resize(static_cast<std::size_t>(params.grid_w) * static_cast<std::size_t>(params.grid_h));
  for (int ix = 0; ix < params.grid_w; ++ix)
    for (int iy = 0; iy < params.grid_h; ++iy)
      f.values[static_cast<std::size_t>(ix) * static_cast<std::size_t>(params.grid_h) + static_cast<std::size_t>(iy)] =
          sample(params, static_cast<double>(ix) / params.grid_w, static_cast<double>(iy) / params.grid_h);
  return f;
}

PointCloud lift_to_cloud(const HeightField& field, const PerlinParams& params, std::size_t T,
                         std::uint64_t resample_seed) {
  if (field.width != params.grid_w || field.height != params.grid_h)
    throw InvalidParameter("lift_to_cloud: field dimensions do not match params");
  if (T < 1) throw InvalidParameter("lift_to_cloud: T must be >= 1");

  PointCloud grid;
  grid.points.reserve(field.values.size());
  for (int ix = 0; ix < field.width; ++ix)
    for (int iy = 0; iy < field.height; ++iy)
      grid.points.push_back({-1.0 + 2.0 * ix / (field.width - 1), -1.0 + 2.0 * iy / (field.height - 1),
                             params.scale * field.at(ix, iy)});

  Rng rng(resample_seed);
  PointCloud resampled;
  resampled.points.reserve(T);
  if (grid.size() >= T) {
    auto idx = rng.sample_without_replacement(grid.size(), T);
    std::sort(idx.begin(), idx.end());
    for (std::size_t i : idx) resampled.points.push_back(grid.points[i]);
  } else {
    for (std::size_t t = 0; t < T; ++t) resampled.points.push_back(grid.points[rng.below(grid.size())]);
  }
  return ifs::normalize_cloud(resampled);
}

std::pair<double, double> CategoryGrid::frequency_scale(std::size_t slot) const {
  constexpr std::size_t kFrequencies = 15;  // 2..16
  const std::size_t levels = std::max<std::size_t>(1, (categories + kFrequencies - 1) / kFrequencies);
  const double frequency = 2.0 + static_cast<double>(slot % kFrequencies);
  const double level = static_cast<double>(slot / kFrequencies);
  const double scale = min_scale + (max_scale - min_scale) * (level + 0.5) / static_cast<double>(levels);
  return {frequency, scale};
}

}  // namespace vgforge::perlin
