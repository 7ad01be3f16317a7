#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "vgforge/ifs.hpp"

namespace vgforge::projection {

inline constexpr double kDefaultCameraRadius = 2.5;

struct ProjectionConfig {
  double fov_y_degrees = 45.0;
  double aspect = 1.0;
  double near = 1.0;
  double far = 100.0;
  int width = 224;
  int height = 224;

  /// Throws InvalidParameter unless 0 < near < far, 0 < fov < 180, width/height >= 1.
  void validate() const;
};

struct CameraPose {
  Vec3 eye{};
  Vec3 look_at{};
  Vec3 up{0.0, 1.0, 0.0};
  double sphere_radius = 0.0;
};

/// 8-bit RGB raster, row 0 at the top. Pixels are pure black or pure white.
struct FractalImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // width * height * 3

  FractalImage() = default;
  FractalImage(int w, int h)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3, 0) {}

  bool is_white(int row, int col) const {
    return pixels[(static_cast<std::size_t>(row) * static_cast<std::size_t>(width) +
                   static_cast<std::size_t>(col)) * 3] == 255;
  }
  void set_white(int row, int col) {
    const std::size_t at =
        (static_cast<std::size_t>(row) * static_cast<std::size_t>(width) + static_cast<std::size_t>(col)) * 3;
    pixels[at] = pixels[at + 1] = pixels[at + 2] = 255;
  }
  std::size_t white_count() const;

  bool operator==(const FractalImage&) const = default;
};

using Mat4 = std::array<double, 16>;  // row-major

/// Right-handed look-at view matrix (camera looks down -z).
Mat4 look_at_matrix(const CameraPose& pose);

/// OpenGL-style perspective matrix; clip w equals view-space depth.
Mat4 perspective_matrix(const ProjectionConfig& cfg);

/// Pixel hit by a world-space point, or nullopt when culled.
struct PixelHit {
  int row;
  int col;
};

/// Precomputed view-projection for per-point work.
class Projector {
 public:
  Projector(const CameraPose& pose, const ProjectionConfig& cfg);

  std::optional<PixelHit> project_point(const Vec3& p) const;

  const ProjectionConfig& config() const noexcept { return cfg_; }

 private:
  Mat4 view_proj_{};
  ProjectionConfig cfg_;
};

/// Half-away-from-zero rounding used for viewport coordinates.
long round_half_away(double v) noexcept;

/// Eye uniform over the sphere of `radius` about `centroid` (uniform in solid angle).
CameraPose sample_camera(const Vec3& centroid, double radius, std::uint64_t cam_seed);

/// Perspective render: one white pixel per surviving point.
FractalImage project(const PointCloud& pc, const CameraPose& pose, const ProjectionConfig& cfg);

/// sample_camera about the origin at radius 2.5, then project.
std::pair<FractalImage, CameraPose> render_instance(const PointCloud& pc, std::uint64_t cam_seed,
                                                    const ProjectionConfig& cfg = {},
                                                    double radius = kDefaultCameraRadius);

}  // namespace vgforge::projection
