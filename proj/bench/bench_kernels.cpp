// Parallel kernels against their serial references.

#include <benchmark/benchmark.h>

#include <map>
#include <random>

#include "nmr/encodings/hash_grid.hpp"
#include "nmr/fields/networks.hpp"
#include "nmr/kernels/gemm.hpp"
#include "nmr/mesh/operations.hpp"
#include "nmr/mesh/sampling.hpp"
#include "nmr/raster/antialias.hpp"
#include "nmr/raster/rasterize.hpp"

using namespace nmr;

namespace {

std::vector<float> random_floats(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> d(-1, 1);
  std::vector<float> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

// Batch of pixel rows through a 256-wide layer, as in the geometry MLP.
template <bool Parallel>
void BM_Gemm(benchmark::State& state) {
  const std::size_t m = state.range(0), n = 256, k = 256;
  const auto a = random_floats(m * k, 1), b = random_floats(k * n, 2);
  std::vector<float> c(m * n);
  for (auto _ : state) {
    if constexpr (Parallel)
      kernels::gemm(kernels::Trans::No, kernels::Trans::No, m, n, k, 1.0f, a.data(), b.data(), 0.0f, c.data());
    else
      kernels::reference::gemm(kernels::Trans::No, kernels::Trans::No, m, n, k, 1.0f, a.data(), b.data(), 0.0f, c.data());
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * m * n * k);
}

struct Scene {
  raster::Camera cam;
  mesh::TriangleMesh mesh;
  raster::FaceNeighbors neighbors;
  raster::RasterFrame frame;
};

const Scene& scene(int size) {
  static std::map<int, Scene> cache;
  auto it = cache.find(size);
  if (it != cache.end()) return it->second;
  Scene s;
  s.cam = raster::Camera::look_at({0.5, -2.4, 0.9}, {0, 0, 0}, {0, 0, 1}, size, size, size);
  s.mesh = mesh::make_icosphere(5);
  s.neighbors = raster::face_neighbors(s.mesh.faces);
  s.frame = raster::rasterize(s.cam, s.mesh.vertices, s.mesh.faces);
  return cache[size] = std::move(s);
}

template <bool Parallel>
void BM_Rasterize(benchmark::State& state) {
  const auto& s = scene(int(state.range(0)));
  for (auto _ : state) {
    auto f = Parallel ? raster::rasterize(s.cam, s.mesh.vertices, s.mesh.faces)
                      : raster::reference::rasterize(s.cam, s.mesh.vertices, s.mesh.faces);
    benchmark::DoNotOptimize(f.tri.data());
  }
  state.SetItemsProcessed(state.iterations() * s.frame.pixel_count());
}

template <bool Parallel>
void BM_Antialias(benchmark::State& state) {
  const auto& s = scene(int(state.range(0)));
  const std::size_t N = s.frame.pixel_count();
  const ad::Tensor<float> img({N, 3}, random_floats(N * 3, 3));
  const auto pos = fields::positions_tensor<float>(s.mesh.vertices);
  for (auto _ : state) {
    auto out = Parallel ? raster::antialias(img, pos, s.mesh.faces, s.neighbors, s.frame, s.cam)
                        : raster::reference::antialias(img, pos, s.mesh.faces, s.neighbors, s.frame, s.cam);
    benchmark::DoNotOptimize(out.data().data());
  }
  state.SetItemsProcessed(state.iterations() * N);
}

template <bool Parallel>
void BM_ChamferNearest(benchmark::State& state) {
  const std::size_t n = state.range(0);
  const auto sphere = mesh::make_icosphere(4);
  const auto a = mesh::sample_points(sphere, n, 1), b = mesh::sample_points(sphere, n, 2);
  for (auto _ : state) {
    const double d = Parallel ? mesh::mean_nearest_distance(a, b) : mesh::reference::mean_nearest_distance(a, b);
    benchmark::DoNotOptimize(d);
  }
  state.SetItemsProcessed(state.iterations() * n);
}

template <bool Parallel>
void BM_HashEncode(benchmark::State& state) {
  const std::size_t n = state.range(0);
  const enc::HashGrid<float> grid(enc::HashGridConfig{}, 4);
  const auto v = random_floats(n * 3, 5);
  const ad::Tensor<float> x({n, 3}, v);
  std::vector<std::array<double, 3>> pts(n);
  for (std::size_t i = 0; i < n; ++i) pts[i] = {v[i * 3], v[i * 3 + 1], v[i * 3 + 2]};
  for (auto _ : state) {
    if constexpr (Parallel) {
      auto e = grid.encode(x);
      benchmark::DoNotOptimize(e.data().data());
    } else {
      auto e = enc::reference::hash_encode(grid, pts);
      benchmark::DoNotOptimize(e.data());
    }
  }
  state.SetItemsProcessed(state.iterations() * n);
}

}  // namespace

BENCHMARK(BM_Gemm<true>)->Name("gemm/parallel")->Arg(1024)->Arg(8192)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Gemm<false>)->Name("gemm/reference")->Arg(1024)->Arg(8192)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Rasterize<true>)->Name("rasterize/parallel")->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Rasterize<false>)->Name("rasterize/reference")->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Antialias<true>)->Name("antialias/parallel")->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Antialias<false>)->Name("antialias/reference")->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ChamferNearest<true>)->Name("chamfer_nn/parallel")->Arg(5000)->Arg(20000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ChamferNearest<false>)->Name("chamfer_nn/reference")->Arg(5000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HashEncode<true>)->Name("hash_encode/parallel")->Arg(16384)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HashEncode<false>)->Name("hash_encode/reference")->Arg(16384)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
