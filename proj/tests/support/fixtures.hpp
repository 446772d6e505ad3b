#pragma once

#include <random>
#include <vector>

#include "dsakt/datastore.hpp"
#include "dsakt/grad_check.hpp"
#include "dsakt/model.hpp"
#include "dsakt/random.hpp"

namespace dsakt::testing {

/// Random right-padded window with `valid` real positions.
inline EncodedWindow random_window(int e, int k, Rng& rng, int valid = -1) {
  if (valid < 0) valid = k;
  EncodedWindow w;
  const auto uk = static_cast<std::size_t>(k);
  w.interaction_tokens.assign(uk, 0);
  w.query_tokens.assign(uk, 0);
  w.targets.assign(uk, 0);
  w.valid_mask.assign(uk, 0);
  for (int t = 0; t < valid; ++t) {
    const auto ut = static_cast<std::size_t>(t);
    w.interaction_tokens[ut] = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(2 * e));
    w.query_tokens[ut] = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(e));
    w.targets[ut] = static_cast<std::uint8_t>(rng() & 1u);
    w.valid_mask[ut] = 1;
  }
  return w;
}

/// Randomizes every tensor, including biases and norm affine terms, so no probe sits at a special point.
template <class T>
void randomize(ParameterSet<T>& params, Rng& rng, double scale = 0.5) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  for_each_tensor(params, [&](const std::string& name, Matrix<T>& m) {
    const bool gamma = name.ends_with(".gamma");
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<T>((gamma ? 1.0 : 0.0) + dist(rng));
  });
}

/// Analytic vs central-difference gradients of the masked BCE of `window` at `params`.
inline GradCheckReport model_grad_check(ParameterSet<double> params, const ModelConfig& config,
                                        const EncodedWindow& window, double tolerance, double step = 1e-5,
                                        double absolute_floor = 0.0) {
  ParameterSet<double> grads = ParameterSet<double>::zeros(config);
  loss_and_gradient(window, params, config, grads);

  std::vector<GradCheckParameter> probes;
  std::vector<const Matrix<double>*> g;
  for_each_tensor(grads, [&](const std::string&, const Matrix<double>& m) { g.push_back(&m); });
  std::size_t i = 0;
  for_each_tensor(params, [&](const std::string& name, Matrix<double>& m) {
    const auto n = static_cast<std::size_t>(m.size());
    probes.push_back({name, {m.data(), n}, {g[i]->data(), n}});
    ++i;
  });
  return grad_check([&] { return window_loss(window, params, config); }, probes, tolerance, step, absolute_floor);
}

}  // namespace dsakt::testing
