#include <benchmark/benchmark.h>

#include "stmc/nullmodel.hpp"
#include "topology.hpp"

using namespace stmc;

static void BM_Rewire(benchmark::State& state) {
  const auto n = static_cast<std::uint32_t>(state.range(0));
  auto t = random_topology(n, n, 0.3, 0.3, 0.1);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(nullmodel::rewire(t, ++seed, 10));
  const auto edges = t.comm.size() + t.mod.size() + t.dep.size();
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(10 * edges));
}
BENCHMARK(BM_Rewire)->RangeMultiplier(2)->Range(16, 128);

static void BM_SampleNull(benchmark::State& state) {
  auto t = random_topology(30, 24, 0.4, 0.3, 0.1);
  nullmodel::RewireConfig cfg{10, static_cast<std::uint32_t>(state.range(0)), 7};
  for (auto _ : state)
    benchmark::DoNotOptimize(
        nullmodel::sample_null_all(t, 0, motifs::Semantics::induced, cfg));
}
BENCHMARK(BM_SampleNull)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);
