#pragma once

// Data-parallel kernels. Each has a serial reference kept for testing and
// benchmarking; both variants must return identical results for any thread
// count. Inside an enclosing OpenMP region the parallel variants run on the
// calling thread only.

#include <cstddef>
#include <vector>

#include "vgforge/ifs.hpp"
#include "vgforge/projection.hpp"

namespace vgforge::kernels {

projection::FractalImage project_serial(const PointCloud& pc, const projection::Projector& proj);
projection::FractalImage project_parallel(const PointCloud& pc, const projection::Projector& proj);

/// Farthest point sampling. Starts from the lexicographically smallest point;
/// distance ties go to the lowest index. Returns `count` point indices.
std::vector<std::size_t> farthest_point_sample_serial(const std::vector<Vec3>& points, std::size_t count);
std::vector<std::size_t> farthest_point_sample_parallel(const std::vector<Vec3>& points, std::size_t count);

/// For each center, the k nearest points ordered by (squared distance, x, y, z, index).
/// Returns centers.size() * k indices, group-major.
std::vector<std::size_t> knn_groups_serial(const std::vector<Vec3>& points,
                                           const std::vector<std::size_t>& centers, std::size_t k);
std::vector<std::size_t> knn_groups_parallel(const std::vector<Vec3>& points,
                                             const std::vector<std::size_t>& centers, std::size_t k);

}  // namespace vgforge::kernels
