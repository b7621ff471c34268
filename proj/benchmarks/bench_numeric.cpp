#include <benchmark/benchmark.h>

#include <numbers>

#include "varcomp/gr.hpp"

namespace {

namespace gr = varcomp::gr;

void BM_Curvature(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto p = gr::sample_metric_jet(1, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(gr::curvature(p, n));
}
BENCHMARK(BM_Curvature)->Arg(2)->Arg(4);

void BM_HilbertIdentity(benchmark::State& state) {
  const auto p = gr::sample_metric_jet(2, 4, 2);
  const auto eps = gr::ricci_source_density(4, -1.0 / (16.0 * std::numbers::pi));
  std::vector<int> comps(10);
  for (int c = 0; c < 10; ++c) comps[static_cast<std::size_t>(c)] = c;
  for (auto _ : state) benchmark::DoNotOptimize(varcomp::numeric_vt_lagrangian(eps, p, comps));
}
BENCHMARK(BM_HilbertIdentity);

void BM_EinsteinAsEulerLagrange(benchmark::State& state) {
  const auto p = gr::sample_metric_jet(3, 4, 4);
  const auto L = gr::hilbert_density(4);
  for (auto _ : state) benchmark::DoNotOptimize(varcomp::numeric_euler_lagrange(L, p));
}
BENCHMARK(BM_EinsteinAsEulerLagrange)->Unit(benchmark::kMillisecond);

void BM_NumericHelmholtzEinstein(benchmark::State& state) {
  const auto p = gr::sample_metric_jet(4, 4, 4);
  const auto eps = gr::einstein_density(4);
  for (auto _ : state) benchmark::DoNotOptimize(varcomp::numeric_helmholtz(eps, p, 2));
}
BENCHMARK(BM_NumericHelmholtzEinstein)->Unit(benchmark::kMillisecond);

void BM_EmPipeline(benchmark::State& state) {
  const auto p = gr::sample_em_jet(5, 4, 2);
  for (auto _ : state) benchmark::DoNotOptimize(gr::em_pipeline_tensor(p, 4, -1.0));
}
BENCHMARK(BM_EmPipeline)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
