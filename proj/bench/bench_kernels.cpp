// Serial reference paths against the OpenMP kernels. Argument 0 selects the
// serial path, 1 the parallel one (worker count from KRON_DYSON_THREADS).
#include <benchmark/benchmark.h>

#include "kron/clt.hpp"
#include "kron/ensemble.hpp"
#include "kron/flatness.hpp"
#include "kron/mde.hpp"
#include "kron/parallel.hpp"
#include "kron/sampler.hpp"

using namespace kron;

namespace {

Execution mode(const benchmark::State& state) { return state.range(0) ? Execution::parallel : Execution::serial; }

void BM_DosGrid(benchmark::State& state) {
  const auto e = presets::four_block();
  DosOptions o;
  o.execution = mode(state);
  const double R = support_radius(e);
  const auto grid = uniform_grid(-R, R, 400);
  for (auto _ : state) benchmark::DoNotOptimize(density_of_states(e, grid, o).mass);
}

void BM_LocalLaw(benchmark::State& state) {
  const auto e = presets::semicircle();
  for (auto _ : state)
    benchmark::DoNotOptimize(local_law_report(e, 256, cplx(0, 0.1), 8, 1, mode(state)).averaged_median);
}

void BM_CltSamples(benchmark::State& state) {
  CltOptions o;
  o.execution = mode(state);
  for (auto _ : state)
    benchmark::DoNotOptimize(run_clt_experiment(presets::semicircle(), bump3(), 0.0, 0.2, 128, 100, 1, o).variance);
}

void BM_FlatnessRestarts(benchmark::State& state) {
  const auto e = presets::four_block();
  FlatnessOptions o;
  o.execution = mode(state);
  const Pattern Z = support_pattern(e);
  for (auto _ : state) benchmark::DoNotOptimize(estimate_flatness_constant(e, Z, o).c_estimate);
}

void BM_HelfferSjostrand(benchmark::State& state) {
  const RealVector ev = sample_eigenvalues(draw_sample(presets::semicircle(), 256, 1, 0));
  const auto f = scaled_function(bump3(), 0.0, 0.2, 256);
  HsOptions o;
  o.execution = mode(state);
  for (auto _ : state) benchmark::DoNotOptimize(hs_statistic(ev, f, o));
}

}  // namespace

BENCHMARK(BM_DosGrid)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LocalLaw)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CltSamples)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FlatnessRestarts)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HelfferSjostrand)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

int main(int argc, char** argv) {
  set_worker_count(resolve_worker_count(0));
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
