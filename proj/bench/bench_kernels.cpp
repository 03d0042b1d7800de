// Kernel benchmarks: parallel/vectorised library paths against the serial
// reference implementations in pointnp::ref.
//
//   ./pointnp_bench                     # all benchmarks
//   ./pointnp_bench --benchmark_filter=fps

#include <benchmark/benchmark.h>

#include "pointnp/dataset.hpp"
#include "pointnp/geometry.hpp"
#include "pointnp/memory.hpp"
#include "pointnp/reference.hpp"
#include "pointnp/rng.hpp"

using namespace pointnp;

namespace {

PointCloud random_cloud(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  PointCloud c;
  c.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    c.points.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
  return c;
}

void bm_fps(benchmark::State& state) {
  const PointCloud cloud = random_cloud(static_cast<std::size_t>(state.range(0)), 1);
  const std::size_t m = cloud.size() / 2;
  for (auto _ : state) benchmark::DoNotOptimize(farthest_point_sample(cloud, m));
}

void bm_fps_ref(benchmark::State& state) {
  const PointCloud cloud = random_cloud(static_cast<std::size_t>(state.range(0)), 1);
  const std::size_t m = cloud.size() / 2;
  for (auto _ : state) benchmark::DoNotOptimize(ref::farthest_point_sample(cloud, m));
}

void bm_knn(benchmark::State& state) {
  const PointCloud ref_cloud = random_cloud(static_cast<std::size_t>(state.range(0)), 2);
  const PointCloud queries = random_cloud(static_cast<std::size_t>(state.range(0)) / 2, 3);
  for (auto _ : state) benchmark::DoNotOptimize(knn(queries, ref_cloud, 90));
}

void bm_knn_ref(benchmark::State& state) {
  const PointCloud ref_cloud = random_cloud(static_cast<std::size_t>(state.range(0)), 2);
  const PointCloud queries = random_cloud(static_cast<std::size_t>(state.range(0)) / 2, 3);
  for (auto _ : state) benchmark::DoNotOptimize(ref::knn(queries, ref_cloud, 90));
}

void bm_pose(benchmark::State& state) {
  const PointCloud cloud = random_cloud(4096, 4);
  const PosEParams params{static_cast<std::size_t>(state.range(0)), 1000.0, 100.0};
  for (auto _ : state) benchmark::DoNotOptimize(pos_e_batch(cloud.points, params));
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) * 4096 * state.range(0) / 2);
}

void bm_pose_ref(benchmark::State& state) {
  const PointCloud cloud = random_cloud(4096, 4);
  const PosEParams params{static_cast<std::size_t>(state.range(0)), 1000.0, 100.0};
  for (auto _ : state) benchmark::DoNotOptimize(ref::pos_e_batch(cloud.points, params));
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) * 4096 * state.range(0) / 2);
}

void bm_encode_global(benchmark::State& state) {
  const PointCloud cloud = normalize_cloud(random_cloud(static_cast<std::size_t>(state.range(0)), 5));
  EncoderConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(encode_global(cloud, cfg));
}

void bm_encode_global_ref(benchmark::State& state) {
  const PointCloud cloud = normalize_cloud(random_cloud(static_cast<std::size_t>(state.range(0)), 5));
  EncoderConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(ref::encode_global(cloud, cfg));
}

void bm_predict(benchmark::State& state) {
  Rng rng(6);
  const std::size_t n = static_cast<std::size_t>(state.range(0)), dim = 1152;
  Matrix feats(n, dim);
  for (double& v : feats.data) v = rng.uniform(-1, 1);
  std::vector<std::uint32_t> labels(n);
  for (auto& l : labels) l = static_cast<std::uint32_t>(rng.uniform_int(40));
  const MemoryBank bank = build_bank(feats, labels, 40, 100.0);
  std::vector<double> test(dim);
  for (double& v : test) v = rng.uniform(-1, 1);
  for (auto _ : state) benchmark::DoNotOptimize(predict(test, bank));
}

BENCHMARK(bm_fps)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_fps_ref)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_knn)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_knn_ref)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_pose)->Arg(72)->Arg(288)->Arg(1152)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_pose_ref)->Arg(72)->Arg(288)->Arg(1152)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_encode_global)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_encode_global_ref)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_predict)->Arg(1000)->Arg(10000)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
