#include <benchmark/benchmark.h>

#include "dsakt/kernels.hpp"
#include "dsakt/model.hpp"

namespace {

using dsakt::Matrix;

void BM_Linear(benchmark::State& state) {
  const auto n = state.range(0);
  const Matrix<float> x = Matrix<float>::Random(n, 64), w = Matrix<float>::Random(64, 64);
  for (auto _ : state) benchmark::DoNotOptimize(dsakt::linear(x, w));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_Linear)->Arg(50)->Arg(100);

void BM_SoftmaxCausal(benchmark::State& state) {
  const auto k = static_cast<int>(state.range(0));
  const Matrix<float> scores = Matrix<float>::Random(k, k);
  const auto mask = dsakt::causal_mask(k);
  for (auto _ : state) benchmark::DoNotOptimize(dsakt::softmax_masked(scores, mask));
}
BENCHMARK(BM_SoftmaxCausal)->Arg(50)->Arg(100);

void BM_LayerNorm(benchmark::State& state) {
  const auto k = state.range(0);
  const Matrix<float> x = Matrix<float>::Random(k, 64);
  const Matrix<float> gamma = Matrix<float>::Ones(1, 64), beta = Matrix<float>::Zero(1, 64);
  for (auto _ : state) benchmark::DoNotOptimize(dsakt::layer_norm(x, gamma, beta));
}
BENCHMARK(BM_LayerNorm)->Arg(50)->Arg(100);

}  // namespace
