#include "vgforge/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <limits>
#include <numeric>
#include <tuple>

#include "vgforge/error.hpp"

namespace vgforge::kernels {
namespace {

using projection::FractalImage;
using projection::Projector;

constexpr int kCulled = -1;

double sq_dist(const Vec3& a, const Vec3& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

std::size_t lexicographic_min(const std::vector<Vec3>& points) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < points.size(); ++i)
    if (points[i] < points[best]) best = i;
  return best;
}

struct Best {
  double dist = -1.0;
  std::size_t index = std::numeric_limits<std::size_t>::max();

  void offer(double d, std::size_t i) {
    if (d > dist || (d == dist && i < index)) {
      dist = d;
      index = i;
    }
  }
};

void check_fps_args(const std::vector<Vec3>& points, std::size_t count) {
  if (count == 0 || count > points.size())
    throw InvalidParameter("farthest_point_sample: need 1 <= count <= " + std::to_string(points.size()));
}

bool knn_less(const std::vector<Vec3>& points, const Vec3& c, std::size_t a, std::size_t b) {
  const double da = sq_dist(points[a], c);
  const double db = sq_dist(points[b], c);
  return std::tie(da, points[a], a) < std::tie(db, points[b], b);
}

void knn_one(const std::vector<Vec3>& points, std::size_t center, std::size_t k, std::size_t* out) {
  std::vector<std::size_t> idx(points.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  const Vec3 c = points[center];
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                    [&](std::size_t a, std::size_t b) { return knn_less(points, c, a, b); });
  std::copy_n(idx.begin(), k, out);
}

void check_knn_args(const std::vector<Vec3>& points, std::size_t k) {
  if (k == 0 || k > points.size())
    throw InvalidParameter("knn_groups: need 1 <= k <= " + std::to_string(points.size()));
}

}  // namespace

FractalImage project_serial(const PointCloud& pc, const Projector& proj) {
  FractalImage img(proj.config().width, proj.config().height);
  for (const auto& p : pc.points)
    if (auto hit = proj.project_point(p)) img.set_white(hit->row, hit->col);
  return img;
}

FractalImage project_parallel(const PointCloud& pc, const Projector& proj) {
  const auto n = static_cast<std::ptrdiff_t>(pc.size());
  const int width = proj.config().width;
  std::vector<int> target(pc.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto hit = proj.project_point(pc.points[static_cast<std::size_t>(i)]);
    target[static_cast<std::size_t>(i)] = hit ? hit->row * width + hit->col : kCulled;
  }
  // scatter is serial: concurrent byte writes to one pixel would race
  FractalImage img(width, proj.config().height);
  for (int t : target)
    if (t != kCulled) img.set_white(t / width, t % width);
  return img;
}

std::vector<std::size_t> farthest_point_sample_serial(const std::vector<Vec3>& points, std::size_t count) {
  check_fps_args(points, count);
  std::vector<std::size_t> picked{lexicographic_min(points)};
  picked.reserve(count);
  std::vector<double> dist(points.size(), std::numeric_limits<double>::infinity());
  while (picked.size() < count) {
    const Vec3 last = points[picked.back()];
    Best best;
    for (std::size_t i = 0; i < points.size(); ++i) {
      dist[i] = std::min(dist[i], sq_dist(points[i], last));
      best.offer(dist[i], i);
    }
    picked.push_back(best.index);
  }
  return picked;
}

std::vector<std::size_t> farthest_point_sample_parallel(const std::vector<Vec3>& points, std::size_t count) {
  check_fps_args(points, count);
  std::vector<std::size_t> picked{lexicographic_min(points)};
  picked.reserve(count);
  std::vector<double> dist(points.size(), std::numeric_limits<double>::infinity());
  const auto n = static_cast<std::ptrdiff_t>(points.size());
  const int threads = omp_in_parallel() ? 1 : omp_get_max_threads();
  std::vector<Best> local(static_cast<std::size_t>(threads));
  while (picked.size() < count) {
    const Vec3 last = points[picked.back()];
    std::fill(local.begin(), local.end(), Best{});
#pragma omp parallel num_threads(threads)
    {
      Best& mine = local[static_cast<std::size_t>(omp_get_thread_num())];
#pragma omp for schedule(static)
      for (std::ptrdiff_t s = 0; s < n; ++s) {
        const auto i = static_cast<std::size_t>(s);
        dist[i] = std::min(dist[i], sq_dist(points[i], last));
        mine.offer(dist[i], i);
      }
    }
    Best best;
    for (const Best& b : local)
      if (b.index != std::numeric_limits<std::size_t>::max()) best.offer(b.dist, b.index);
    picked.push_back(best.index);
  }
  return picked;
}

std::vector<std::size_t> knn_groups_serial(const std::vector<Vec3>& points,
                                           const std::vector<std::size_t>& centers, std::size_t k) {
  check_knn_args(points, k);
  std::vector<std::size_t> out(centers.size() * k);
  for (std::size_t g = 0; g < centers.size(); ++g) knn_one(points, centers[g], k, out.data() + g * k);
  return out;
}

std::vector<std::size_t> knn_groups_parallel(const std::vector<Vec3>& points,
                                             const std::vector<std::size_t>& centers, std::size_t k) {
  check_knn_args(points, k);
  std::vector<std::size_t> out(centers.size() * k);
  const auto groups = static_cast<std::ptrdiff_t>(centers.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t g = 0; g < groups; ++g) {
    const auto gi = static_cast<std::size_t>(g);
    knn_one(points, centers[gi], k, out.data() + gi * k);
  }
  return out;
}

}  // namespace vgforge::kernels
