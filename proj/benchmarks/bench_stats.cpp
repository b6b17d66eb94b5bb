#include <benchmark/benchmark.h>

#include <random>

#include "stmc/stats.hpp"

using namespace stmc;

namespace {

stats::CovariateTable table(int n, int p, bool counts) {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> z(0.0, 1.0);
  stats::CovariateTable t;
  t.x.resize(n, p);
  t.y.resize(n);
  for (int j = 0; j < p; ++j) {
    t.columns.push_back("c" + std::to_string(j));
    t.log_columns.push_back(false);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) t.x(i, j) = z(gen);
    double eta = 0.5 * t.x(i, 0) - 0.3 * t.x(i, 1);
    t.y(i) = counts ? static_cast<double>(std::poisson_distribution<int>(std::exp(1 + eta))(gen))
                    : eta + z(gen);
  }
  return t;
}

}  // namespace

static void BM_EnetPath(benchmark::State& state) {
  const bool counts = state.range(1) != 0;
  auto family = counts ? stats::Family::poisson : stats::Family::gaussian;
  auto t = table(static_cast<int>(state.range(0)), 8, counts);
  auto lambdas = stats::lambda_sequence(stats::lambda_max(t, family, 0.5), 100);
  for (auto _ : state)
    benchmark::DoNotOptimize(stats::elastic_net_path(t, family, 0.5, lambdas));
}
BENCHMARK(BM_EnetPath)->ArgsProduct({{100, 1000}, {0, 1}})->Unit(benchmark::kMillisecond);

static void BM_CvSelect(benchmark::State& state) {
  auto t = table(static_cast<int>(state.range(0)), 8, false);
  stats::CvOptions opt;
  opt.seed = 1;
  for (auto _ : state)
    benchmark::DoNotOptimize(stats::cv_select(t, stats::Family::gaussian, opt));
}
BENCHMARK(BM_CvSelect)->Arg(200)->Unit(benchmark::kMillisecond);
