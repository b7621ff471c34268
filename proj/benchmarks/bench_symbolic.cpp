#include <benchmark/benchmark.h>

#include "varcomp/parser.hpp"
#include "varcomp/variational.hpp"

namespace {

const char* kDamped = R"(
base t;
field q[2] order 2;
param m sym2, k sym2, a sym2;
source eps[s] = m[s,v]*D2(q[v]) + k[s,v]*q[v] + a[s,v]*D1(q[v]);
)";

const char* kCubic = R"(
base t;
field q[2] order 2;
param m sym2, k sym2;
param c[2,2,2] sym;
source eps[s] = m[s,v]*D2(q[v]) + k[s,v]*q[v] + 3*c[s,v,w]*D1(q[v])*D1(q[w]);
)";

const char* kWave = R"(
base t, x;
field u order 2;
param c;
source eps = D(u; t, t) - c^2*D(u; x, x) + D(u; t)*D(u; x)^2;
)";

void BM_Parse(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(varcomp::parse(kCubic));
}
BENCHMARK(BM_Parse);

void BM_Helmholtz(benchmark::State& state, const char* text) {
  const auto pf = varcomp::parse(text);
  for (auto _ : state) benchmark::DoNotOptimize(varcomp::helmholtz(*pf.source));
}
BENCHMARK_CAPTURE(BM_Helmholtz, damped, kDamped);
BENCHMARK_CAPTURE(BM_Helmholtz, cubic, kCubic);
BENCHMARK_CAPTURE(BM_Helmholtz, wave_2d, kWave);

void BM_CanonicalCompletion(benchmark::State& state, const char* text) {
  const auto pf = varcomp::parse(text);
  for (auto _ : state) benchmark::DoNotOptimize(varcomp::canonical_completion(*pf.source));
}
BENCHMARK_CAPTURE(BM_CanonicalCompletion, damped, kDamped);
BENCHMARK_CAPTURE(BM_CanonicalCompletion, cubic, kCubic);
BENCHMARK_CAPTURE(BM_CanonicalCompletion, wave_2d, kWave);

void BM_CompletionViaHelmholtz(benchmark::State& state, const char* text) {
  const auto pf = varcomp::parse(text);
  for (auto _ : state) benchmark::DoNotOptimize(varcomp::completion_via_helmholtz(*pf.source));
}
BENCHMARK_CAPTURE(BM_CompletionViaHelmholtz, cubic, kCubic);

}  // namespace
