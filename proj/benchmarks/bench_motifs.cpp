#include <benchmark/benchmark.h>

#include "stmc/motifs.hpp"
#include "topology.hpp"

using namespace stmc;

// Sizes scale developers and artifacts together at a fixed mean degree.
static void BM_CountMotifs(benchmark::State& state) {
  const auto n = static_cast<std::uint32_t>(state.range(0));
  auto t = random_topology(n, 4 * n, 8.0 / n, 3.0 / n, 6.0 / (4 * n));
  for (auto _ : state)
    benchmark::DoNotOptimize(motifs::count_motifs(t, motifs::Semantics::induced));
  state.counters["edges"] =
      static_cast<double>(t.comm.size() + t.mod.size() + t.dep.size());
}
BENCHMARK(BM_CountMotifs)->RangeMultiplier(2)->Range(16, 512);

static void BM_Participation(benchmark::State& state) {
  const auto n = static_cast<std::uint32_t>(state.range(0));
  auto t = random_topology(n, 4 * n, 8.0 / n, 3.0 / n, 6.0 / (4 * n));
  motifs::MotifCounter counter(t);
  std::vector<motifs::Participation> rows(t.artifact_count);
  for (auto _ : state) {
    std::fill(rows.begin(), rows.end(), motifs::Participation{});
    benchmark::DoNotOptimize(counter.triangles(&rows));
    benchmark::DoNotOptimize(counter.squares(motifs::Semantics::induced, &rows));
  }
}
BENCHMARK(BM_Participation)->RangeMultiplier(4)->Range(16, 256);
