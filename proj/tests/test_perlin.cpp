#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "vgforge/error.hpp"
#include "vgforge/ifs.hpp"
#include "vgforge/perlin.hpp"
#include "vgforge/rng.hpp"

using namespace vgforge;
using namespace vgforge::perlin;

TEST(Perlin, LatticeVerticesAreExactlyZero) {
  for (std::uint64_t seed : {0ULL, 1ULL, 99ULL, 0xFFFFFFFFFFFFULL})
    for (long ix = -20; ix <= 20; ++ix)
      for (long iy = -20; iy <= 20; ++iy)
        EXPECT_EQ(gradient_noise(static_cast<double>(ix), static_cast<double>(iy), seed), 0.0);
  PerlinParams p;
  p.frequency = 4.0;
  p.category_seed = 3;
  for (int i = 0; i <= 8; ++i)
    for (int j = 0; j <= 8; ++j) EXPECT_EQ(sample(p, i / 4.0, j / 4.0), 0.0);
}

TEST(Perlin, FrequencyDoublingIsCoordinateSubstitution) {
  Rng rng(5);
  for (int trial = 0; trial < 2000; ++trial) {
    PerlinParams p;
    p.category_seed = rng.next_u64();
    p.frequency = 2.0 + static_cast<double>(rng.below(15));
    PerlinParams doubled = p;
    doubled.frequency = 2.0 * p.frequency;
    const double x = rng.uniform(), y = rng.uniform();
    EXPECT_NEAR(sample(doubled, x, y), sample(p, 2.0 * x, 2.0 * y), 1e-6);
  }
}

TEST(Perlin, MatchesBilinearGradientOracle) {
  Rng rng(6);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::uint64_t seed = rng.below(50);
    const double u = rng.uniform(-5.0, 5.0), v = rng.uniform(-5.0, 5.0);
    const double x0 = std::floor(u), y0 = std::floor(v);
    const double fx = u - x0, fy = v - y0;
    double want = 0.0;
    for (int cx = 0; cx < 2; ++cx)
      for (int cy = 0; cy < 2; ++cy) {
        const auto g = lattice_gradient(seed, static_cast<long>(x0) + cx, static_cast<long>(y0) + cy);
        const double w = (cx ? fx : 1.0 - fx) * (cy ? fy : 1.0 - fy);
        want += w * (g[0] * (fx - cx) + g[1] * (fy - cy));
      }
    EXPECT_NEAR(gradient_noise(u, v, seed), want, 1e-12);
  }
}

TEST(Perlin, GradientsAreUnitAndSeeded) {
  for (long i = -5; i < 5; ++i) {
    const auto g = lattice_gradient(7, i, 2 * i);
    EXPECT_NEAR(g[0] * g[0] + g[1] * g[1], 1.0, 1e-12);
  }
  EXPECT_NE(lattice_gradient(1, 0, 0), lattice_gradient(2, 0, 0));
}

TEST(Perlin, HeightFieldLayoutAndBounds) {
  PerlinParams p;
  p.grid_w = 30;
  p.grid_h = 20;
  p.frequency = 3.0;
  p.category_seed = 11;
  const auto f = perlin_2d(p);
  ASSERT_EQ(f.values.size(), 600u);
  for (int ix = 0; ix < 30; ++ix)
    for (int iy = 0; iy < 20; ++iy) {
      EXPECT_EQ(f.at(ix, iy), sample(p, ix / 30.0, iy / 20.0));
      EXPECT_LE(std::abs(f.at(ix, iy)), std::sqrt(2.0));
    }
}

TEST(Perlin, LiftProducesNormalizedCloudOfRequestedSize) {
  PerlinParams p;
  p.category_seed = 4;
  p.scale = 1.6;
  const auto f = perlin_2d(p);
  for (std::size_t T : {100u, 8192u, 20000u}) {
    const auto pc = lift_to_cloud(f, p, T, 2);
    ASSERT_EQ(pc.size(), T);
    Vec3 c{};
    double mx = 0.0;
    for (const auto& q : pc.points)
      for (int a = 0; a < 3; ++a) {
        c[a] += q[a] / static_cast<double>(T);
        mx = std::max(mx, std::abs(q[a]));
      }
    for (double v : c) EXPECT_NEAR(v, 0.0, 1e-9);
    EXPECT_NEAR(mx, 1.0, 1e-12);
  }
  const auto a = lift_to_cloud(f, p, 8192, 2);
  EXPECT_EQ(a.points, lift_to_cloud(f, p, 8192, 2).points);
  std::set<Vec3> uniq(a.points.begin(), a.points.end());
  EXPECT_EQ(uniq.size(), 8192u);  // 10000 cells, drawn without replacement
}

TEST(Perlin, LiftRejectsMismatchedField) {
  PerlinParams p;
  const auto f = perlin_2d(p);
  PerlinParams other = p;
  other.grid_w = 50;
  EXPECT_THROW(lift_to_cloud(f, other), InvalidParameter);
  EXPECT_THROW(lift_to_cloud(f, p, 0), InvalidParameter);
  p.frequency = 0.0;
  EXPECT_THROW(perlin_2d(p), InvalidParameter);
}

TEST(Perlin, CategoryGridCoversFrequenciesAndScaleRange) {
  CategoryGrid g{30, 1.2, 2.0};
  std::set<std::pair<double, double>> seen;
  for (std::size_t k = 0; k < 30; ++k) {
    const auto [f, s] = g.frequency_scale(k);
    EXPECT_GE(f, 2.0);
    EXPECT_LE(f, 16.0);
    EXPECT_GT(s, 1.2);
    EXPECT_LT(s, 2.0);
    seen.insert({f, s});
  }
  EXPECT_EQ(seen.size(), 30u);
  EXPECT_DOUBLE_EQ(g.frequency_scale(0).first, 2.0);
  EXPECT_DOUBLE_EQ(g.frequency_scale(14).first, 16.0);
  EXPECT_DOUBLE_EQ(g.frequency_scale(15).first, 2.0);
  EXPECT_DOUBLE_EQ(g.frequency_scale(0).second, 1.4);
  EXPECT_DOUBLE_EQ(g.frequency_scale(15).second, 1.8);
  EXPECT_DOUBLE_EQ((CategoryGrid{10, 1.2, 2.0}.frequency_scale(3).second), 1.6);
}
