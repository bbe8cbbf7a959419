// Serial reference vs OpenMP kernels. Thread count follows OMP_NUM_THREADS /
// CONVEXCHECK_THREADS.
#include <benchmark/benchmark.h>

#include "convexcheck/checker.hpp"
#include "convexcheck/experiment.hpp"
#include "convexcheck/oracle.hpp"
#include "convexcheck/regions.hpp"

using namespace convexcheck;

namespace {

struct Fixture {
  Network net = sample_gaussian(Architecture{2, {5, 5}, false}, 7);
  DomainBox box = DomainBox::cube(2, 3.0);
  Partition part = enumerate_regions(net, box);
  std::vector<std::vector<double>> pts = uniform_points(box, 100000, 11);
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

void BM_ClassifySerial(benchmark::State& st) {
  const auto& f = fixture();
  for (auto _ : st) benchmark::DoNotOptimize(classify_points_serial(f.net, f.part, f.pts));
  st.SetItemsProcessed(st.iterations() * static_cast<long>(f.pts.size()));
}

void BM_ClassifyParallel(benchmark::State& st) {
  const auto& f = fixture();
  for (auto _ : st) benchmark::DoNotOptimize(classify_points(f.net, f.part, f.pts));
  st.SetItemsProcessed(st.iterations() * static_cast<long>(f.pts.size()));
}

void BM_SamplerSerial(benchmark::State& st) {
  const Network net = build_counterexample();
  const DomainBox box = DomainBox::cube(2, 3.0);
  for (auto _ : st) benchmark::DoNotOptimize(sample_convex_oracle_serial(net, box, 100000, 3));
}

void BM_SamplerParallel(benchmark::State& st) {
  const Network net = build_counterexample();
  const DomainBox box = DomainBox::cube(2, 3.0);
  for (auto _ : st) benchmark::DoNotOptimize(sample_convex_oracle(net, box, 100000, 3));
}

ExperimentConfig cell_config() {
  ExperimentConfig cfg;
  cfg.draws = 200;
  return cfg;
}

void BM_CellSerial(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(run_cell_serial(cell_config(), 2, 2));
}

void BM_CellParallel(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(run_cell(cell_config(), 2, 2));
}

}  // namespace

BENCHMARK(BM_ClassifySerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ClassifyParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SamplerSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SamplerParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CellSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CellParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
