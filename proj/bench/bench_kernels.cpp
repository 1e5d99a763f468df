// Serial reference vs OpenMP kernel for each parallelized hot path.

#include <benchmark/benchmark.h>

#include <random>

#include "thermoforge/compiler.hpp"
#include "thermoforge/cooling.hpp"
#include "thermoforge/majorization.hpp"

using namespace thermoforge;

namespace {

void BM_CoolingSerial(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(serial::run_cooling(d));
}

void BM_CoolingParallel(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_cooling(d));
}

EnergyBlocks compile_blocks(int n) {
  // n degenerate catalyst levels at each of three energies: three blocks of size n.
  std::vector<double> ec;
  for (int l = 0; l < 3; ++l) {
    for (int k = 0; k < n; ++k) ec.push_back(1.5 * l);
  }
  const std::vector<double> es = {0.0};
  return energy_blocks(Spectrum::from_energies(es), Spectrum::from_energies(ec));
}

void BM_CompileExactSerial(benchmark::State& state) {
  const EnergyBlocks blocks = compile_blocks(static_cast<int>(state.range(0)));
  const Operator u = random_energy_preserving_unitary(blocks, 1);
  for (auto _ : state) benchmark::DoNotOptimize(serial::compile_exact(u, blocks));
}

void BM_CompileExactParallel(benchmark::State& state) {
  const EnergyBlocks blocks = compile_blocks(static_cast<int>(state.range(0)));
  const Operator u = random_energy_preserving_unitary(blocks, 1);
  for (auto _ : state) benchmark::DoNotOptimize(compile_exact(u, blocks));
}

void BM_ReachSerial(benchmark::State& state) {
  const int depth = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(serial::eto_reach_search(cooling_default_input(), cooling_system_spectrum(), {}, depth));
  }
}

void BM_ReachParallel(benchmark::State& state) {
  const int depth = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(eto_reach_search(cooling_default_input(), cooling_system_spectrum(), {}, depth));
  }
}

}  // namespace

BENCHMARK(BM_CoolingSerial)->Arg(12)->Arg(16)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CoolingParallel)->Arg(12)->Arg(16)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CompileExactSerial)->Arg(4)->Arg(8)->Arg(16)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_CompileExactParallel)->Arg(4)->Arg(8)->Arg(16)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_ReachSerial)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ReachParallel)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
