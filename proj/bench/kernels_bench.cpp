// Serial reference vs OpenMP kernels on a default-size fractal cloud.

#include <benchmark/benchmark.h>
#include <omp.h>

#include "vgforge/ifs.hpp"
#include "vgforge/kernels.hpp"
#include "vgforge/projection.hpp"

using namespace vgforge;

namespace {

const PointCloud& cloud() {
  static const PointCloud pc = ifs::normalize_cloud(ifs::chaos_game(ifs::sample_ifs(1), ifs::kDefaultPoints, 1));
  return pc;
}

void set_threads(const benchmark::State& state) { omp_set_num_threads(static_cast<int>(state.range(0))); }

void BM_ProjectSerial(benchmark::State& state) {
  const projection::Projector proj(projection::sample_camera({0, 0, 0}, 2.5, 7), projection::ProjectionConfig{});
  for (auto _ : state) benchmark::DoNotOptimize(kernels::project_serial(cloud(), proj));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(cloud().size()));
}

void BM_ProjectParallel(benchmark::State& state) {
  set_threads(state);
  const projection::Projector proj(projection::sample_camera({0, 0, 0}, 2.5, 7), projection::ProjectionConfig{});
  for (auto _ : state) benchmark::DoNotOptimize(kernels::project_parallel(cloud(), proj));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(cloud().size()));
}

void BM_FpsSerial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(kernels::farthest_point_sample_serial(cloud().points, 64));
}

void BM_FpsParallel(benchmark::State& state) {
  set_threads(state);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::farthest_point_sample_parallel(cloud().points, 64));
}

void BM_KnnSerial(benchmark::State& state) {
  const auto centers = kernels::farthest_point_sample_serial(cloud().points, 64);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::knn_groups_serial(cloud().points, centers, 32));
}

void BM_KnnParallel(benchmark::State& state) {
  set_threads(state);
  const auto centers = kernels::farthest_point_sample_serial(cloud().points, 64);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::knn_groups_parallel(cloud().points, centers, 32));
}

void BM_ChaosGame(benchmark::State& state) {
  const auto p = ifs::sample_ifs(1);
  for (auto _ : state) benchmark::DoNotOptimize(ifs::chaos_game(p, ifs::kDefaultPoints, 1));
}

}  // namespace

BENCHMARK(BM_ProjectSerial);
BENCHMARK(BM_ProjectParallel)->Arg(1)->Arg(2)->Arg(4)->UseRealTime();
BENCHMARK(BM_FpsSerial);
BENCHMARK(BM_FpsParallel)->Arg(1)->Arg(2)->Arg(4)->UseRealTime();
BENCHMARK(BM_KnnSerial);
BENCHMARK(BM_KnnParallel)->Arg(1)->Arg(2)->Arg(4)->UseRealTime();
BENCHMARK(BM_ChaosGame);

BENCHMARK_MAIN();
