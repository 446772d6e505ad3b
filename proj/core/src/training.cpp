#include "dsakt/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "dsakt/error.hpp"
#include "dsakt/evaluation.hpp"

namespace dsakt {

double noam_lr(std::int64_t step, int d, int warmup_steps) {
  if (step < 1) throw ConfigError("noam_lr: step must be >= 1");
  if (d < 1 || warmup_steps < 1) throw ConfigError("noam_lr: d and warmup_steps must be >= 1");
  const auto s = static_cast<double>(step);
  const auto w = static_cast<double>(warmup_steps);
  return std::pow(static_cast<double>(d), -0.5) * std::min(std::pow(s, -0.5), s * std::pow(w, -1.5));
}

template <class T>
OptimizerState<T> OptimizerState<T>::fresh(const ModelConfig& config, int warmup_steps, AdamHyper hyper) {
  OptimizerState<T> state;
  state.m = ParameterSet<T>::zeros(config);
  state.v = ParameterSet<T>::zeros(config);
  state.hyper = hyper;
  state.warmup_steps = warmup_steps;
  state.d = config.d;
  return state;
}

template <class T>
void adam_update(std::span<T> theta, std::span<const T> grad, std::span<T> m, std::span<T> v, std::int64_t step,
                 double lr, const AdamHyper& hyper) {
  if (grad.size() != theta.size() || m.size() != theta.size() || v.size() != theta.size())
    throw ShapeError("adam_update: parameter, gradient and moment sizes differ");
  if (step < 1) throw ConfigError("adam_update: step must be >= 1");
  const double b1 = hyper.beta1, b2 = hyper.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(step));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(step));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double g = grad[i];
    const double mi = b1 * m[i] + (1.0 - b1) * g;
    const double vi = b2 * v[i] + (1.0 - b2) * g * g;
    m[i] = static_cast<T>(mi);
    v[i] = static_cast<T>(vi);
    const double m_hat = mi / correction1;
    const double v_hat = vi / correction2;
    theta[i] = static_cast<T>(theta[i] - lr * m_hat / (std::sqrt(v_hat) + hyper.eps));
  }
}

template <class T>
void adam_step(ParameterSet<T>& params, const ParameterSet<T>& grads, OptimizerState<T>& state, double lr) {
  std::vector<std::pair<std::string, const Matrix<T>*>> g;
  for_each_tensor(grads, [&](const std::string& name, const Matrix<T>& m) { g.emplace_back(name, &m); });
  for (const auto& [name, tensor] : g)
    if (!tensor->allFinite()) throw NumericError("non-finite gradient in parameter '" + name + "'");

  std::vector<Matrix<T>*> m, v;
  for_each_tensor(state.m, [&](const std::string&, Matrix<T>& t) { m.push_back(&t); });
  for_each_tensor(state.v, [&](const std::string&, Matrix<T>& t) { v.push_back(&t); });
  std::size_t i = 0;
  for_each_tensor(params, [&](const std::string& name, Matrix<T>& theta) {
    const Matrix<T>& grad = *g[i].second;
    if (grad.rows() != theta.rows() || grad.cols() != theta.cols() || m[i]->size() != theta.size())
      throw ShapeError("adam_step: gradient/moment shape mismatch for '" + name + "'");
    const auto n = static_cast<std::size_t>(theta.size());
    adam_update<T>({theta.data(), n}, {grad.data(), n}, {m[i]->data(), n}, {v[i]->data(), n}, state.step, lr,
                   state.hyper);
    ++i;
  });
}

template <class T>
void adam_step(ParameterSet<T>& params, const ParameterSet<T>& grads, OptimizerState<T>& state) {
  adam_step(params, grads, state, noam_lr(state.step, state.d, state.warmup_steps));
}

std::vector<std::vector<std::size_t>> make_batches(std::size_t window_count, std::size_t batch_size,
                                                   std::uint64_t seed, std::uint64_t epoch) {
  if (window_count == 0) throw ConfigError("make_batches: no windows");
  if (batch_size == 0) throw ConfigError("make_batches: batch size must be >= 1");
  std::vector<std::size_t> order(window_count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = substream(seed, {0xBA7Cu, epoch});
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < window_count; start += batch_size) {
    const std::size_t end = std::min(window_count, start + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
  if (warmup_steps < 1) throw ConfigError("train: warmup_steps must be >= 1");
}

std::string to_json_line(const EpochReport& report, bool with_timing) {
  // ordered_json keeps the documented key order
  nlohmann::ordered_json j{{"epoch", report.epoch}, {"loss", report.loss}, {"val_auc", report.val_auc},
                           {"lr", report.lr}};
  if (with_timing) j["seconds"] = report.seconds;
  return j.dump();
}

template <class T>
T batch_gradient(std::span<const EncodedWindow> windows, std::span<const std::size_t> batch,
                 const ParameterSet<T>& params, const ModelConfig& config, ParameterSet<T>& grads, Rng* dropout_rng) {
  std::size_t total = 0;
  for (auto idx : batch) total += static_cast<std::size_t>(windows[idx].valid_count());
  if (total == 0) throw NumericError("batch has no valid position");
  T loss = 0;
  for (auto idx : batch) {
    const auto& w = windows[idx];
    const T weight = static_cast<T>(w.valid_count()) / static_cast<T>(total);
    loss += weight * loss_and_gradient(w, params, config, grads, weight, dropout_rng);
  }
  return loss;
}

FitResult fit(std::span<const EncodedWindow> train, std::span<const EncodedWindow> validation,
              const ModelConfig& model, const TrainConfig& config,
              const std::function<void(const EpochReport&)>& on_epoch) {
  model.validate();
  config.validate();
  if (train.empty()) throw ConfigError("fit: empty training set");
  if (validation.empty()) throw ConfigError("fit: empty validation set");
  for (const auto& w : train) check_window(w, model);
  {
    std::size_t pos = 0, neg = 0;
    for (const auto& w : validation) {
      check_window(w, model);
      for (std::size_t t = 0; t < w.targets.size(); ++t)
        if (w.valid_mask[t]) (w.targets[t] ? pos : neg)++;
    }
    if (pos == 0 || neg == 0) throw UndefinedMetricError("fit: validation set needs both outcome classes");
  }

  ParameterSet<float> params = init_params<float>(model, config.seed);
  auto state = OptimizerState<float>::fresh(model, config.warmup_steps, config.adam);
  Rng dropout_rng = substream(config.seed, {0xD50Fu});

  FitResult result;
  double best_auc = -1.0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    const auto batches = make_batches(train.size(), config.batch_size, config.seed, static_cast<std::uint64_t>(epoch));
    double loss_sum = 0.0;
    std::size_t positions = 0;
    double lr = 0.0;
    for (std::size_t b = 0; b < batches.size(); ++b) {
      std::size_t n = 0;
      for (auto idx : batches[b]) n += static_cast<std::size_t>(train[idx].valid_count());
      try {
        ParameterSet<float> grads = ParameterSet<float>::zeros(model);
        const float loss = batch_gradient<float>(train, batches[b], params, model, grads, &dropout_rng);
        if (!std::isfinite(loss)) throw NumericError("non-finite training loss");
        loss_sum += static_cast<double>(loss) * static_cast<double>(n);
        positions += n;
        ++state.step;
        lr = noam_lr(state.step, state.d, state.warmup_steps);
        adam_step(params, grads, state, lr);
      } catch (const NumericError& ex) {
        throw NumericError(std::string(ex.what()) + " at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(b + 1));
      }
    }

    EpochReport report;
    report.epoch = epoch;
    report.loss = loss_sum / static_cast<double>(positions);
    report.val_auc = evaluate(params, model, validation).auc;
    report.lr = lr;
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    if (report.val_auc > best_auc) {
      best_auc = report.val_auc;
      result.best = params;
      result.best_epoch = epoch;
    }
    result.reports.push_back(report);
    if (on_epoch) on_epoch(report);
  }
  return result;
}

template struct OptimizerState<float>;
template struct OptimizerState<double>;
template void adam_update<float>(std::span<float>, std::span<const float>, std::span<float>, std::span<float>,
                                 std::int64_t, double, const AdamHyper&);
template void adam_update<double>(std::span<double>, std::span<const double>, std::span<double>, std::span<double>,
                                  std::int64_t, double, const AdamHyper&);
template void adam_step<float>(ParameterSet<float>&, const ParameterSet<float>&, OptimizerState<float>&, double);
template void adam_step<double>(ParameterSet<double>&, const ParameterSet<double>&, OptimizerState<double>&, double);
template void adam_step<float>(ParameterSet<float>&, const ParameterSet<float>&, OptimizerState<float>&);
template void adam_step<double>(ParameterSet<double>&, const ParameterSet<double>&, OptimizerState<double>&);
template float batch_gradient<float>(std::span<const EncodedWindow>, std::span<const std::size_t>,
                                     const ParameterSet<float>&, const ModelConfig&, ParameterSet<float>&, Rng*);
template double batch_gradient<double>(std::span<const EncodedWindow>, std::span<const std::size_t>,
                                       const ParameterSet<double>&, const ModelConfig&, ParameterSet<double>&, Rng*);

}  // namespace dsakt
