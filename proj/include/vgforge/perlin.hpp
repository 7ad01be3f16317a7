#pragma once

#include <cstdint>
#include <vector>

#include "vgforge/ifs.hpp"

namespace vgforge::perlin {

struct PerlinParams {
  int grid_w = 100;
  int grid_h = 100;
  double frequency = 4.0;  // lattice periods across the unit domain
  double scale = 1.0;      // z-lift multiplier
  std::uint64_t category_seed = 0;

  void validate() const;
};

/// Row-major grid_w x grid_h height field; value(ix, iy) at [ix * grid_h + iy].
struct HeightField {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  double at(int ix, int iy) const {
    return values[static_cast<std::size_t>(ix) * static_cast<std::size_t>(height) + static_cast<std::size_t>(iy)];
  }
};

/// Unit gradient hashed from (seed, lattice vertex).
std::array<double, 2> lattice_gradient(std::uint64_t seed, long ix, long iy) noexcept;

/// Gradient noise at lattice coordinates (u, v), corner contributions blended
/// with linear weights. Zero at every integer vertex.
double gradient_noise(double u, double v, std::uint64_t seed) noexcept;

/// Noise at unit-domain coordinates (x, y): gradient_noise(frequency * x, frequency * y).
double sample(const PerlinParams& params, double x, double y) noexcept;

/// Evaluates `sample` at (ix / grid_w, iy / grid_h) for every grid cell.
HeightField perlin_2d(const PerlinParams& params);

/// One point per cell at (x_norm, y_norm, scale * value), x/y spanning [-1, 1];
/// resampled to T points (without replacement when the grid has >= T cells)
/// and normalized.
PointCloud lift_to_cloud(const HeightField& field, const PerlinParams& params,
                         std::size_t T = ifs::kDefaultPoints, std::uint64_t resample_seed = 0);

/// Category grid: frequencies {2..16} crossed with scale levels in
/// [min_scale, max_scale]; slot k maps to frequency 2 + k % 15 and scale level k / 15.
struct CategoryGrid {
  std::size_t categories = 1;
  double min_scale = 1.2;
  double max_scale = 2.0;

  std::pair<double, double> frequency_scale(std::size_t slot) const;
};

}  // namespace vgforge::perlin
