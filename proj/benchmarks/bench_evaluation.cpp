#include <benchmark/benchmark.h>

#include <random>

#include "dsakt/evaluation.hpp"

namespace {

void BM_Auc(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> scores(n);
  std::vector<std::uint8_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    scores[i] = u(rng);
    labels[i] = static_cast<std::uint8_t>(u(rng) < scores[i]);
  }
  for (auto _ : state) benchmark::DoNotOptimize(dsakt::auc(scores, labels));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_Auc)->Arg(1 << 12)->Arg(1 << 18);

}  // namespace
