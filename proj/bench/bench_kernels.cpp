// Serial reference vs OpenMP kernels. Run with OMP_NUM_THREADS to pick the
// parallel width.

#include <benchmark/benchmark.h>

#include <random>

#include "lfi/kernels.hpp"
#include "lfi/retinex.hpp"
#include "lfi/synth.hpp"
#include "lfi/tv_solver.hpp"

using namespace lfi;
using kernels::Backend;

namespace {

const kernels::Grid kGrid{Dims{9, 9, 128, 128}, 3};

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = d(g);
  return v;
}

Backend backend_of(const benchmark::State& state) { return state.range(0) ? Backend::Parallel : Backend::Serial; }

void label(benchmark::State& state) { state.SetLabel(state.range(0) ? "openmp" : "serial"); }

void BM_ApplyDtD(benchmark::State& state) {
  const auto& k = kernels::kernel_set(backend_of(state));
  const auto x = random_vector(kGrid.size(), 1);
  std::vector<double> out(x.size());
  for (auto _ : state) {
    for (Axis a : {Axis::X, Axis::Y, Axis::U, Axis::V}) k.apply_dtd_add(kGrid, a, x, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetBytesProcessed(int64_t(state.iterations()) * int64_t(x.size() * sizeof(double) * 8));
  label(state);
}

void BM_SplitUpdate(benchmark::State& state) {
  const auto& k = kernels::kernel_set(backend_of(state));
  const auto dx = random_vector(kGrid.size(), 2);
  std::vector<double> z(dx.size(), 0.0), u(dx.size(), 0.0), dz(dx.size());
  for (auto _ : state) benchmark::DoNotOptimize(k.admm_split_update(dx, 0.05, z, u, dz));
  label(state);
}

void BM_Dot(benchmark::State& state) {
  const auto& k = kernels::kernel_set(backend_of(state));
  const auto x = random_vector(kGrid.size(), 3), y = random_vector(kGrid.size(), 4);
  for (auto _ : state) benchmark::DoNotOptimize(k.dot(x, y));
  label(state);
}

void BM_CsrMatvec(benchmark::State& state) {
  const auto& k = kernels::kernel_set(backend_of(state));
  SceneSpec spec;
  spec.dims = Dims{1, 1, 256, 256};
  const Image view = generate(spec, 5).radiance.view(0, 0);
  Image norm(256, 256, 1, 0.5);
  const LogView l = to_log(norm, 1e-4);
  const EdgeWeightMap w{EdgeRaster(256, 256, 1.0), EdgeRaster(256, 256, 1.0)};
  const auto sys = build_system(l, w, absolute_scale_anchors(l, 0.01), texture_pairs(view, TextureParams{}),
                                RetinexWeights{});
  const auto x = random_vector(std::size_t(sys.a.rows), 6);
  std::vector<double> y(x.size());
  for (auto _ : state) {
    k.csr_matvec(sys.a, x, y);
    benchmark::DoNotOptimize(y.data());
  }
  label(state);
}

void BM_TvFilter(benchmark::State& state) {
  SceneSpec spec = preset("noisy");
  spec.dims = Dims{5, 5, 64, 64};
  const LightField lf = generate(spec, 7).radiance;
  TvParams p;
  p.backend = backend_of(state);
  p.max_iters = 20;
  for (auto _ : state) benchmark::DoNotOptimize(tvl1_filter(lf, p).field.samples().data());
  label(state);
}

}  // namespace

BENCHMARK(BM_ApplyDtD)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SplitUpdate)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Dot)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CsrMatvec)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TvFilter)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
