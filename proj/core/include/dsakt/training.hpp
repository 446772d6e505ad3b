#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dsakt/datastore.hpp"
#include "dsakt/model.hpp"

namespace dsakt {

/// d^-0.5 * min(step^-0.5, step * warmup^-1.5). Throws ConfigError for step < 1.
double noam_lr(std::int64_t step, int d, int warmup_steps);

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <class T>
struct OptimizerState {
  std::int64_t step = 0;  // optimizer steps taken, incremented before each update
  ParameterSet<T> m;
  ParameterSet<T> v;
  AdamHyper hyper;
  int warmup_steps = 60;
  int d = 0;  // Noam base scale

  static OptimizerState fresh(const ModelConfig& config, int warmup_steps, AdamHyper hyper = {});
};

/// Bias-corrected Adam on flat arrays. `step` is the 1-based index of this update.
template <class T>
void adam_update(std::span<T> theta, std::span<const T> grad, std::span<T> m, std::span<T> v, std::int64_t step,
                 double lr, const AdamHyper& hyper);

/// One Adam step over every tensor with an explicit learning rate.
/// Throws NumericError naming the first parameter with a non-finite gradient.
template <class T>
void adam_step(ParameterSet<T>& params, const ParameterSet<T>& grads, OptimizerState<T>& state, double lr);

/// Same, with the learning rate taken from the Noam schedule at state.step.
template <class T>
void adam_step(ParameterSet<T>& params, const ParameterSet<T>& grads, OptimizerState<T>& state);

/// Window indices per batch; shuffled by a permutation keyed on (seed, epoch). Last batch may be short.
std::vector<std::vector<std::size_t>> make_batches(std::size_t window_count, std::size_t batch_size,
                                                   std::uint64_t seed, std::uint64_t epoch);

struct TrainConfig {
  std::size_t batch_size = 128;
  int epochs = 100;
  std::uint64_t seed = 0;
  int warmup_steps = 60;
  AdamHyper adam;

  void validate() const;
};

struct EpochReport {
  int epoch = 0;
  double loss = 0.0;     // position-weighted mean training BCE over the epoch
  double val_auc = 0.0;
  double lr = 0.0;       // learning rate of the last step in the epoch
  double seconds = 0.0;  // wall clock
};

/// One JSON object per line. `with_timing` = false drops the wall-clock field.
std::string to_json_line(const EpochReport& report, bool with_timing = true);

struct FitResult {
  ParameterSet<float> best;
  int best_epoch = 0;
  std::vector<EpochReport> reports;
};

/// Adam + Noam over shuffled batches; keeps the parameters of the epoch with the highest
/// validation AUC (earliest on ties). Batch loss is the mean BCE over all valid positions of the
/// batch. Throws NumericError (with epoch and batch) when the loss turns non-finite.
FitResult fit(std::span<const EncodedWindow> train, std::span<const EncodedWindow> validation,
              const ModelConfig& model, const TrainConfig& config,
              const std::function<void(const EpochReport&)>& on_epoch = {});

/// Gradient of the pooled batch loss; returns that loss.
template <class T>
T batch_gradient(std::span<const EncodedWindow> windows, std::span<const std::size_t> batch,
                 const ParameterSet<T>& params, const ModelConfig& config, ParameterSet<T>& grads,
                 Rng* dropout_rng = nullptr);

}  // namespace dsakt
