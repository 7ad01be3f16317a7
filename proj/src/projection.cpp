#include "vgforge/projection.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "vgforge/error.hpp"
#include "vgforge/kernels.hpp"
#include "vgforge/rng.hpp"

namespace vgforge::projection {
namespace {

Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
Vec3 normalized(const Vec3& a) {
  const double n = std::sqrt(dot(a, a));
  return {a[0] / n, a[1] / n, a[2] / n};
}

Mat4 multiply(const Mat4& a, const Mat4& b) {
  Mat4 c{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      double s = 0.0;
      for (int k = 0; k < 4; ++k) s += a[i * 4 + k] * b[k * 4 + j];
      c[i * 4 + j] = s;
    }
  return c;
}

}  // namespace

void ProjectionConfig::validate() const {
  if (!(near > 0.0 && near < far)) throw InvalidParameter("projection: need 0 < near < far");
  if (!(fov_y_degrees > 0.0 && fov_y_degrees < 180.0))
    throw InvalidParameter("projection: fov_y must lie in (0, 180) degrees");
  if (!(aspect > 0.0)) throw InvalidParameter("projection: aspect must be positive");
  if (width < 1 || height < 1) throw InvalidParameter("projection: width and height must be >= 1");
}

std::size_t FractalImage::white_count() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < pixels.size(); i += 3) n += pixels[i] == 255 ? 1 : 0;
  return n;
}

Mat4 look_at_matrix(const CameraPose& pose) {
  const Vec3 f = normalized(sub(pose.look_at, pose.eye));
  const Vec3 s = normalized(cross(f, pose.up));
  const Vec3 u = cross(s, f);
  return {s[0],  s[1],  s[2],  -dot(s, pose.eye),
          u[0],  u[1],  u[2],  -dot(u, pose.eye),
          -f[0], -f[1], -f[2], dot(f, pose.eye),
          0.0,   0.0,   0.0,   1.0};
}

Mat4 perspective_matrix(const ProjectionConfig& cfg) {
  const double fov = cfg.fov_y_degrees * std::numbers::pi / 180.0;
  const double focal = 1.0 / std::tan(fov / 2.0);
  const double n = cfg.near;
  const double f = cfg.far;
  return {focal / cfg.aspect, 0.0, 0.0, 0.0,
          0.0, focal, 0.0, 0.0,
          0.0, 0.0, (f + n) / (n - f), 2.0 * f * n / (n - f),
          0.0, 0.0, -1.0, 0.0};
}

long round_half_away(double v) noexcept {
  return static_cast<long>(v < 0.0 ? std::ceil(v - 0.5) : std::floor(v + 0.5));
}

Projector::Projector(const CameraPose& pose, const ProjectionConfig& cfg)
    : view_proj_(multiply(perspective_matrix(cfg), look_at_matrix(pose))), cfg_(cfg) {
  cfg_.validate();
}

std::optional<PixelHit> Projector::project_point(const Vec3& p) const {
  const auto& m = view_proj_;
  const double cx = m[0] * p[0] + m[1] * p[1] + m[2] * p[2] + m[3];
  const double cy = m[4] * p[0] + m[5] * p[1] + m[6] * p[2] + m[7];
  const double cw = m[12] * p[0] + m[13] * p[1] + m[14] * p[2] + m[15];
  // w is the view-space depth in front of the camera.
  if (!(cw >= cfg_.near && cw <= cfg_.far)) return std::nullopt;
  const double x_ndc = cx / cw;
  const double y_ndc = cy / cw;
  if (std::abs(x_ndc) > 1.0 || std::abs(y_ndc) > 1.0) return std::nullopt;

  const double px = (x_ndc + 1.0) * 0.5 * cfg_.width;
  const double py = (1.0 - y_ndc) * 0.5 * cfg_.height;
  const long col = std::clamp(round_half_away(px), 0L, static_cast<long>(cfg_.width - 1));
  const long row = std::clamp(round_half_away(py), 0L, static_cast<long>(cfg_.height - 1));
  return PixelHit{static_cast<int>(row), static_cast<int>(col)};
}

CameraPose sample_camera(const Vec3& centroid, double radius, std::uint64_t cam_seed) {
  if (!(radius > 0.0)) throw InvalidParameter("sample_camera: radius must be positive");
  Rng rng(cam_seed);
  // Archimedes: z uniform on [-1, 1] and azimuth uniform gives uniform solid angle.
  const double z = rng.uniform(-1.0, 1.0);
  const double phi = 2.0 * std::numbers::pi * rng.uniform();
  const double rxy = std::sqrt(std::max(0.0, 1.0 - z * z));
  const Vec3 dir{rxy * std::cos(phi), rxy * std::sin(phi), z};

  CameraPose pose;
  pose.sphere_radius = radius;
  pose.look_at = centroid;
  pose.eye = {centroid[0] + radius * dir[0], centroid[1] + radius * dir[1], centroid[2] + radius * dir[2]};
  // view direction is -dir
  pose.up = std::abs(dir[1]) > 0.999 ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 1.0, 0.0};
  return pose;
}

FractalImage project(const PointCloud& pc, const CameraPose& pose, const ProjectionConfig& cfg) {
  return kernels::project_parallel(pc, Projector(pose, cfg));
}

std::pair<FractalImage, CameraPose> render_instance(const PointCloud& pc, std::uint64_t cam_seed,
                                                    const ProjectionConfig& cfg, double radius) {
  CameraPose pose = sample_camera({0.0, 0.0, 0.0}, radius, cam_seed);
  FractalImage img = project(pc, pose, cfg);
  return {std::move(img), pose};
}

}  // namespace vgforge::projection
