#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "vgforge/digest.hpp"
#include "vgforge/error.hpp"
#include "vgforge/ifs.hpp"
#include "vgforge/image_io.hpp"
#include "vgforge/projection.hpp"
#include "vgforge/rng.hpp"

using namespace vgforge;
using namespace vgforge::projection;

namespace {

CameraPose front_camera(double distance = 2.5) {
  CameraPose pose;
  pose.eye = {0.0, 0.0, distance};
  pose.look_at = {0.0, 0.0, 0.0};
  pose.up = {0.0, 1.0, 0.0};
  return pose;
}

std::set<std::pair<int, int>> white_set(const FractalImage& img) {
  std::set<std::pair<int, int>> out;
  for (int r = 0; r < img.height; ++r)
    for (int c = 0; c < img.width; ++c)
      if (img.is_white(r, c)) out.insert({r, c});
  return out;
}

// Pinhole camera written from first principles: pixel = center + half * focal * lateral / depth.
std::optional<std::pair<double, double>> pinhole(const CameraPose& pose, const ProjectionConfig& cfg, const Vec3& p) {
  auto sub = [](const Vec3& a, const Vec3& b) { return Vec3{a[0] - b[0], a[1] - b[1], a[2] - b[2]}; };
  auto dot = [](const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; };
  auto cross = [](const Vec3& a, const Vec3& b) {
    return Vec3{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
  };
  auto unit = [&](const Vec3& a) {
    const double n = std::sqrt(dot(a, a));
    return Vec3{a[0] / n, a[1] / n, a[2] / n};
  };
  const Vec3 forward = unit(sub(pose.look_at, pose.eye));
  const Vec3 right = unit(cross(forward, pose.up));
  const Vec3 up = cross(right, forward);
  const Vec3 d = sub(p, pose.eye);
  const double depth = dot(d, forward);
  if (depth < cfg.near || depth > cfg.far) return std::nullopt;
  const double t = std::tan(cfg.fov_y_degrees * std::numbers::pi / 360.0);
  const double xn = dot(d, right) / (depth * t * cfg.aspect);
  const double yn = dot(d, up) / (depth * t);
  if (std::abs(xn) > 1.0 || std::abs(yn) > 1.0) return std::nullopt;
  return std::make_pair((1.0 - yn) * 0.5 * cfg.height, (xn + 1.0) * 0.5 * cfg.width);
}

}  // namespace

TEST(Projection, LookAtPointLandsOnCenterPixel) {
  const ProjectionConfig cfg;
  const auto img = project(PointCloud{{{0.0, 0.0, 0.0}}}, front_camera(), cfg);
  EXPECT_EQ(img.white_count(), 1u);
  EXPECT_TRUE(img.is_white(112, 112));
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto pose = sample_camera({0.3, -0.2, 0.1}, 2.5, seed);
    const auto hit = Projector(pose, cfg).project_point(pose.look_at);
    ASSERT_TRUE(hit);
    EXPECT_EQ(hit->row, 112);
    EXPECT_EQ(hit->col, 112);
  }
}

TEST(Projection, OriginCloudGivesSingleWhitePixel) {
  PointCloud pc;
  pc.points.assign(8192, Vec3{0.0, 0.0, 0.0});
  const auto [img, pose] = render_instance(pc, 17);
  EXPECT_EQ(img.white_count(), 1u);
  EXPECT_TRUE(img.is_white(112, 112));
  EXPECT_EQ(img.width, 224);
  EXPECT_EQ(img.height, 224);
}

TEST(Projection, PointsBehindCameraAreCulled) {
  const auto pose = front_camera();
  const Projector proj(pose, ProjectionConfig{});
  EXPECT_FALSE(proj.project_point({0.0, 0.0, 3.0}));
  EXPECT_FALSE(proj.project_point({0.0, 0.0, 10.0}));
  EXPECT_FALSE(proj.project_point({0.1, 0.1, 2.5}));  // in the eye plane
  EXPECT_TRUE(proj.project_point({0.0, 0.0, 1.0}));
  const auto img = project(PointCloud{{{0.0, 0.0, 5.0}, {0.5, 0.5, 4.0}}}, pose, ProjectionConfig{});
  EXPECT_EQ(img.white_count(), 0u);
}

TEST(Projection, NearAndFarPlanesHonored) {
  const ProjectionConfig cfg;
  const Projector proj(front_camera(), cfg);
  EXPECT_FALSE(proj.project_point({0.0, 0.0, 1.6}));    // depth 0.9 < near
  EXPECT_TRUE(proj.project_point({0.0, 0.0, 1.5}));     // depth exactly 1
  EXPECT_TRUE(proj.project_point({0.0, 0.0, -97.5}));   // depth exactly 100
  EXPECT_FALSE(proj.project_point({0.0, 0.0, -97.6}));  // beyond far
}

TEST(Projection, FieldOfViewIs45Degrees) {
  const ProjectionConfig cfg;
  const Projector proj(front_camera(), cfg);
  const double edge = 2.5 * std::tan(22.5 * std::numbers::pi / 180.0);
  EXPECT_TRUE(proj.project_point({0.0, edge * 0.999, 0.0}));
  EXPECT_FALSE(proj.project_point({0.0, edge * 1.001, 0.0}));
  EXPECT_TRUE(proj.project_point({edge * 0.999, 0.0, 0.0}));  // aspect 1
  EXPECT_FALSE(proj.project_point({edge * 1.001, 0.0, 0.0}));
  const auto top = proj.project_point({0.0, edge * 0.999, 0.0});
  EXPECT_EQ(top->row, 0);
  EXPECT_EQ(top->col, 112);
}

TEST(Projection, PerspectiveOffsetScalesInverselyWithDepth) {
  const ProjectionConfig cfg;
  const Projector proj(front_camera(), cfg);
  const double focal_px = 112.0 / std::tan(22.5 * std::numbers::pi / 180.0);
  for (double x : {0.1, 0.2, 0.35})
    for (double z : {0.0, -1.0, -3.0, 1.0}) {
      const double depth = 2.5 - z;
      const auto hit = proj.project_point({x, 0.0, z});
      ASSERT_TRUE(hit);
      EXPECT_NEAR(hit->col - 112.0, focal_px * x / depth, 1.0);
      EXPECT_EQ(hit->row, 112);
    }
  const auto near_hit = proj.project_point({0.3, 0.0, 0.0});
  const auto far_hit = proj.project_point({0.3, 0.0, -2.5});
  EXPECT_NEAR((near_hit->col - 112.0) / (far_hit->col - 112.0), 2.0, 1.0 / (far_hit->col - 112.0) + 0.05);
}

TEST(Projection, AgreesWithPinholeOracle) {
  Rng rng(8);
  const ProjectionConfig cfg;
  std::size_t boundary = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto pose = sample_camera({0.0, 0.0, 0.0}, 2.5, seed);
    const Projector proj(pose, cfg);
    for (int i = 0; i < 500; ++i) {
      const Vec3 p{rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)};
      const auto want = pinhole(pose, cfg, p);
      const auto got = proj.project_point(p);
      if (!want) {
        EXPECT_FALSE(got);
        continue;
      }
      ASSERT_TRUE(got);
      EXPECT_LE(std::abs(got->row - std::clamp(want->first, 0.0, 223.0)), 0.5 + 1e-9);
      EXPECT_LE(std::abs(got->col - std::clamp(want->second, 0.0, 223.0)), 0.5 + 1e-9);
      boundary += (got->row == 0 || got->col == 0) ? 1 : 0;
    }
  }
  EXPECT_LT(boundary, 200u);
}

TEST(Projection, PointOrderDoesNotMatter) {
  auto pc = ifs::normalize_cloud(ifs::chaos_game(ifs::sample_ifs(3), 8192, 3));
  const auto pose = sample_camera({0.0, 0.0, 0.0}, 2.5, 44);
  const auto a = project(pc, pose, ProjectionConfig{});
  Rng rng(1);
  const auto perm = rng.permutation(pc.size());
  PointCloud shuffled;
  for (auto i : perm) shuffled.points.push_back(pc.points[i]);
  std::reverse(pc.points.begin(), pc.points.end());
  EXPECT_EQ(a, project(shuffled, pose, ProjectionConfig{}));
  EXPECT_EQ(a, project(pc, pose, ProjectionConfig{}));
  EXPECT_GT(a.white_count(), 100u);
}

TEST(Projection, PixelsAreBlackOrWhite) {
  const auto pc = ifs::normalize_cloud(ifs::chaos_game(ifs::sample_ifs(9), 8192, 9));
  const auto [img, pose] = render_instance(pc, 3);
  for (auto v : img.pixels) EXPECT_TRUE(v == 0 || v == 255);
  EXPECT_EQ(white_set(img).size(), img.white_count());
}

TEST(Projection, RejectsBadFrustum) {
  ProjectionConfig cfg;
  cfg.near = 0.0;
  EXPECT_THROW(cfg.validate(), InvalidParameter);
  cfg = {};
  cfg.far = 0.5;
  EXPECT_THROW(cfg.validate(), InvalidParameter);
  cfg = {};
  cfg.fov_y_degrees = 180.0;
  EXPECT_THROW(cfg.validate(), InvalidParameter);
  cfg = {};
  cfg.width = 0;
  EXPECT_THROW(Projector(front_camera(), cfg), InvalidParameter);
}

TEST(RoundHalfAway, Ties) {
  EXPECT_EQ(round_half_away(0.5), 1);
  EXPECT_EQ(round_half_away(-0.5), -1);
  EXPECT_EQ(round_half_away(1.49), 1);
  EXPECT_EQ(round_half_away(111.5), 112);
}

TEST(SampleCamera, OnSphereLookingAtCentroid) {
  const Vec3 c{0.2, -0.4, 0.7};
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    const auto pose = sample_camera(c, 2.5, seed);
    const double r = std::hypot(pose.eye[0] - c[0], pose.eye[1] - c[1], pose.eye[2] - c[2]);
    EXPECT_NEAR(r, 2.5, 1e-12);
    EXPECT_EQ(pose.look_at, c);
    EXPECT_DOUBLE_EQ(pose.sphere_radius, 2.5);
  }
  EXPECT_THROW(sample_camera(c, 0.0, 1), InvalidParameter);
}

TEST(SampleCamera, UniformOverSolidAngle) {
  // Uniform on the sphere: each coordinate of the direction is uniform on [-1, 1],
  // so its mean is 0 and its second moment is 1/3.
  const int n = 40000;
  Vec3 mean{}, second{};
  int upper_cap = 0;
  for (int s = 0; s < n; ++s) {
    const auto pose = sample_camera({0, 0, 0}, 1.0, static_cast<std::uint64_t>(s));
    for (int a = 0; a < 3; ++a) {
      mean[a] += pose.eye[a] / n;
      second[a] += pose.eye[a] * pose.eye[a] / n;
    }
    upper_cap += pose.eye[1] > 0.5 ? 1 : 0;
  }
  for (int a = 0; a < 3; ++a) {
    EXPECT_NEAR(mean[a], 0.0, 0.015);
    EXPECT_NEAR(second[a], 1.0 / 3.0, 0.01);
  }
  EXPECT_NEAR(static_cast<double>(upper_cap) / n, 0.25, 0.01);  // cap area fraction (1 - 0.5) / 2
}

TEST(SampleCamera, UpVectorFallbackNearPoles) {
  int fallbacks = 0;
  for (std::uint64_t seed = 0; seed < 20000; ++seed) {
    const auto pose = sample_camera({0, 0, 0}, 2.5, seed);
    const double dy = std::abs(pose.eye[1]) / 2.5;
    if (dy > 0.999) {
      ++fallbacks;
      EXPECT_EQ(pose.up, (Vec3{1.0, 0.0, 0.0}));
    } else {
      EXPECT_EQ(pose.up, (Vec3{0.0, 1.0, 0.0}));
    }
    const auto hit = Projector(pose, ProjectionConfig{}).project_point({0, 0, 0});
    ASSERT_TRUE(hit);
  }
  CameraPose pole;
  pole.eye = {0.0, 2.5, 0.0};
  pole.up = {1.0, 0.0, 0.0};
  const auto hit = Projector(pole, ProjectionConfig{}).project_point({0, 0, 0});
  ASSERT_TRUE(hit);
  EXPECT_EQ(hit->row, 112);
  EXPECT_EQ(hit->col, 112);
  EXPECT_GE(fallbacks, 0);
}

TEST(Projection, FrozenRenderDigest) {
  const auto pc = ifs::normalize_cloud(ifs::chaos_game(ifs::sample_ifs(1), 8192, 1));
  const auto [img, pose] = render_instance(pc, 5);
  EXPECT_EQ(sha256_hex(encode_png(img)), "92d0c2e2a2d891f7d291cd58b8adf4ba286bf7681a99008108deb16351b94c07");
}
