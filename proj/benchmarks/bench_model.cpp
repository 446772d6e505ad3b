#include <benchmark/benchmark.h>

#include "dsakt/model.hpp"
#include "dsakt/random.hpp"
#include "dsakt/training.hpp"

namespace {

using namespace dsakt;

EncodedWindow full_window(int e, int k, Rng& rng) {
  EncodedWindow w;
  for (int t = 0; t < k; ++t) {
    w.interaction_tokens.push_back(1 + static_cast<int>(rng() % static_cast<std::uint64_t>(2 * e)));
    w.query_tokens.push_back(1 + static_cast<int>(rng() % static_cast<std::uint64_t>(e)));
    w.targets.push_back(static_cast<std::uint8_t>(rng() & 1u));
    w.valid_mask.push_back(1);
  }
  return w;
}

ModelConfig config_for(const benchmark::State& state) {
  return {.e = 100, .k = static_cast<int>(state.range(0)), .d = static_cast<int>(state.range(1)), .h = 8};
}

void BM_Forward(benchmark::State& state) {
  const auto c = config_for(state);
  const auto params = init_params<float>(c, 1);
  Rng rng(1);
  const auto w = full_window(c.e, c.k, rng);
  for (auto _ : state) benchmark::DoNotOptimize(forward(w, params, c));
}
BENCHMARK(BM_Forward)->Args({50, 24})->Args({100, 64});

void BM_ForwardBackward(benchmark::State& state) {
  const auto c = config_for(state);
  const auto params = init_params<float>(c, 1);
  auto grads = ParameterSet<float>::zeros(c);
  Rng rng(1);
  const auto w = full_window(c.e, c.k, rng);
  for (auto _ : state) benchmark::DoNotOptimize(loss_and_gradient(w, params, c, grads));
}
BENCHMARK(BM_ForwardBackward)->Args({50, 24})->Args({100, 64});

void BM_AdamStep(benchmark::State& state) {
  const ModelConfig c{.e = 100, .k = 100, .d = 64, .h = 8};
  auto params = init_params<float>(c, 1);
  auto grads = init_params<float>(c, 2);
  auto opt = OptimizerState<float>::fresh(c, 60);
  for (auto _ : state) {
    ++opt.step;
    adam_step(params, grads, opt);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(params.element_count()));
}
BENCHMARK(BM_AdamStep);

}  // namespace
