#include "dsakt/model.hpp"

#include <cmath>
#include <random>

#include "dsakt/error.hpp"

namespace dsakt {

void ModelConfig::validate() const {
  if (e < 1) throw ConfigError("model: e must be >= 1");
  if (k < 1) throw ConfigError("model: k must be >= 1");
  if (d < 1) throw ConfigError("model: d must be >= 1");
  if (h < 1 || d % h != 0)
    throw ConfigError("model: head count " + std::to_string(h) + " must divide d = " + std::to_string(d));
  if (d_ff < 0) throw ConfigError("model: d_ff must be >= 1 (or 0 for d)");
  if (n_blocks < 1) throw ConfigError("model: n_blocks must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("model: dropout must lie in [0, 1)");
}

template <class T>
ParameterSet<T> ParameterSet<T>::zeros(const ModelConfig& config) {
  config.validate();
  const int d = config.d;
  const int f = config.ffn_width();
  auto z = [](int r, int c) { return Matrix<T>::Zero(r, c); };
  auto attention = [&] { return AttentionWeights<T>{z(d, d), z(d, d), z(d, d), z(d, d)}; };
  auto norm = [&] { return NormWeights<T>{z(1, d), z(1, d)}; };
  auto ffn = [&] { return FeedForwardWeights<T>{z(d, f), z(1, f), z(f, d), z(1, d)}; };

  ParameterSet<T> p;
  p.interaction_embedding = z(2 * config.e + 1, d);
  p.exercise_embedding = z(config.e + 1, d);
  p.interaction_projection = z(d, d);
  p.exercise_projection = z(d, d);
  for (int b = 0; b < config.n_blocks; ++b) {
    p.encoder.push_back({attention(), norm(), ffn(), norm()});
    p.decoder.push_back({attention(), norm(), norm(), ffn(), norm()});
  }
  p.head_weight = z(d, 1);
  p.head_bias = z(1, 1);
  return p;
}

std::int64_t param_count(const ModelConfig& config) {
  config.validate();
  const std::int64_t e = config.e, d = config.d, f = config.ffn_width(), blocks = config.n_blocks;
  const std::int64_t embeddings = (2 * e + 1) * d + (e + 1) * d;
  const std::int64_t projections = 2 * d * d;
  const std::int64_t attention = 4 * d * d;
  const std::int64_t ffn = d * f + f + f * d + d;
  const std::int64_t norm = 2 * d;
  const std::int64_t encoder = attention + ffn + 2 * norm;
  const std::int64_t decoder = attention + ffn + 3 * norm;
  const std::int64_t head = d + 1;
  return embeddings + projections + blocks * (encoder + decoder) + head;
}

template <class T>
Matrix<T> positional_table(int k, int d) {
  if (k < 1 || d < 1) throw ConfigError("positional_table: k and d must be >= 1");
  Matrix<T> table(k, d);
  for (int i = 1; i <= k; ++i) {
    for (int j = 1; j <= d; ++j) {
      const double pos = static_cast<double>(i);
      const double v = (j % 2 == 0) ? std::sin(pos / std::pow(10000.0, static_cast<double>(j) / d))
                                    : std::cos(pos / std::pow(10000.0, static_cast<double>(j - 1) / d));
      table(i - 1, j - 1) = static_cast<T>(v);
    }
  }
  return table;
}

Mask causal_mask(int k) {
  if (k < 1) throw ConfigError("causal_mask: k must be >= 1");
  Mask mask(k, k);
  for (int t = 0; t < k; ++t)
    for (int s = 0; s < k; ++s) mask(t, s) = s <= t;
  return mask;
}

template <class T>
ParameterSet<T> init_params(const ModelConfig& config, std::uint64_t seed) {
  ParameterSet<T> p = ParameterSet<T>::zeros(config);
  Rng rng = substream(seed, {0x1417u});
  std::normal_distribution<double> embedding_dist(0.0, 1.0 / std::sqrt(static_cast<double>(config.d)));

  auto fill_normal = [&](Matrix<T>& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<T>(embedding_dist(rng));
  };
  auto fill_uniform = [&](Matrix<T>& m) {
    const double bound = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<T>(dist(rng));
  };
  auto fill_attention = [&](AttentionWeights<T>& a) {
    fill_uniform(a.query);
    fill_uniform(a.key);
    fill_uniform(a.value);
    fill_uniform(a.output);
  };
  auto fill_ffn = [&](FeedForwardWeights<T>& f) {
    fill_uniform(f.w1);
    fill_uniform(f.w2);
  };
  auto unit_norm = [](NormWeights<T>& n) { n.gamma.setOnes(); };

  fill_normal(p.interaction_embedding);
  fill_normal(p.exercise_embedding);
  fill_uniform(p.interaction_projection);
  fill_uniform(p.exercise_projection);
  for (auto& b : p.encoder) {
    fill_attention(b.attention);
    fill_ffn(b.ffn);
    unit_norm(b.attention_norm);
    unit_norm(b.ffn_norm);
  }
  for (auto& b : p.decoder) {
    fill_attention(b.attention);
    fill_ffn(b.ffn);
    unit_norm(b.self_norm);
    unit_norm(b.cross_norm);
    unit_norm(b.ffn_norm);
  }
  fill_uniform(p.head_weight);
  return p;
}

namespace {

template <class T>
Matrix<T> gather_rows(std::span<const int> tokens, const Matrix<T>& table, const Matrix<T>& positions) {
  if (static_cast<Eigen::Index>(tokens.size()) != positions.rows() || table.cols() != positions.cols())
    throw ShapeError("embed: " + std::to_string(tokens.size()) + " tokens, table " +
                     shape_string(table.rows(), table.cols()) + ", positions " +
                     shape_string(positions.rows(), positions.cols()));
  Matrix<T> out = positions;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    const int tok = tokens[t];
    if (tok < 0 || tok >= table.rows())
      throw RangeError("embed: token " + std::to_string(tok) + " outside [0, " + std::to_string(table.rows() - 1) +
                       "]");
    out.row(static_cast<Eigen::Index>(t)) += table.row(tok);
  }
  return out;
}

template <class T>
void scatter_rows(std::span<const int> tokens, const Matrix<T>& grad, Matrix<T>& table_grad) {
  for (std::size_t t = 0; t < tokens.size(); ++t) table_grad.row(tokens[t]) += grad.row(static_cast<Eigen::Index>(t));
}

}  // namespace

template <class T>
Matrix<T> embed_tokens(std::span<const int> tokens, const Matrix<T>& table, const Matrix<T>& positions,
                       const Matrix<T>& projection) {
  return linear(gather_rows(tokens, table, positions), projection);
}

template <class T>
Matrix<T> embed_interactions(std::span<const int> tokens, const ParameterSet<T>& params, const Matrix<T>& positions) {
  return embed_tokens(tokens, params.interaction_embedding, positions, params.interaction_projection);
}

template <class T>
Matrix<T> embed_exercises(std::span<const int> tokens, const ParameterSet<T>& params, const Matrix<T>& positions) {
  return embed_tokens(tokens, params.exercise_embedding, positions, params.exercise_projection);
}

template <class T>
MultiHeadResult<T> multi_head(const Matrix<T>& query_input, const Matrix<T>& key_value_input,
                              const AttentionWeights<T>& weights, const Mask& mask, int heads, bool scale_full_d,
                              MultiHeadCache<T>* cache) {
  const Eigen::Index d = weights.query.cols();
  if (heads < 1 || d % heads != 0)
    throw ConfigError("multi_head: " + std::to_string(heads) + " heads do not divide width " + std::to_string(d));
  const Eigen::Index width = d / heads;
  const T scale = T(1) / std::sqrt(static_cast<T>(scale_full_d ? d : width));

  Matrix<T> q = linear(query_input, weights.query);
  Matrix<T> k = linear(key_value_input, weights.key);
  Matrix<T> v = linear(key_value_input, weights.value);

  MultiHeadResult<T> result;
  Matrix<T> concat(q.rows(), d);
  result.weights.reserve(static_cast<std::size_t>(heads));
  for (int i = 0; i < heads; ++i) {
    const Eigen::Index c0 = i * width;
    Matrix<T> scores = (q.middleCols(c0, width) * k.middleCols(c0, width).transpose()) * scale;
    Matrix<T> attn = softmax_masked(scores, mask);
    concat.middleCols(c0, width).noalias() = attn * v.middleCols(c0, width);
    result.weights.push_back(std::move(attn));
  }
  result.output = linear(concat, weights.output);
  if (cache) {
    cache->query_input = query_input;
    cache->key_value_input = key_value_input;
    cache->q = std::move(q);
    cache->k = std::move(k);
    cache->v = std::move(v);
    cache->weights = result.weights;
    cache->concat = std::move(concat);
    cache->scale = scale;
  }
  return result;
}

template <class T>
void multi_head_backward(const MultiHeadCache<T>& cache, const AttentionWeights<T>& weights, const Matrix<T>& dout,
                         int heads, AttentionWeights<T>& grads, Matrix<T>& dquery, Matrix<T>& dkey_value) {
  const Eigen::Index d = weights.query.cols();
  const Eigen::Index width = d / heads;
  Matrix<T> dconcat = linear_backward(cache.concat, weights.output, dout, grads.output);
  Matrix<T> dq(cache.q.rows(), d), dk(cache.k.rows(), d), dv(cache.v.rows(), d);
  for (int i = 0; i < heads; ++i) {
    const Eigen::Index c0 = i * width;
    const Matrix<T>& attn = cache.weights[static_cast<std::size_t>(i)];
    Matrix<T> dhead = dconcat.middleCols(c0, width);
    Matrix<T> dattn = dhead * cache.v.middleCols(c0, width).transpose();
    dv.middleCols(c0, width).noalias() = attn.transpose() * dhead;
    Matrix<T> dscores = softmax_masked_backward(attn, dattn) * cache.scale;
    dq.middleCols(c0, width).noalias() = dscores * cache.k.middleCols(c0, width);
    dk.middleCols(c0, width).noalias() = dscores.transpose() * cache.q.middleCols(c0, width);
  }
  dquery = linear_backward(cache.query_input, weights.query, dq, grads.query);
  dkey_value = linear_backward(cache.key_value_input, weights.key, dk, grads.key);
  dkey_value += linear_backward(cache.key_value_input, weights.value, dv, grads.value);
}

namespace {

template <class T>
struct Dropout {
  Matrix<T> keep;  // empty when inactive, else 0 or 1/(1-rate)

  void sample(Eigen::Index rows, Eigen::Index cols, double rate, Rng* rng) {
    if (!rng || rate <= 0.0) return;
    keep.resize(rows, cols);
    const T scale = static_cast<T>(1.0 / (1.0 - rate));
    for (Eigen::Index i = 0; i < keep.size(); ++i) keep.data()[i] = uniform01(*rng) < rate ? T(0) : scale;
  }
  Matrix<T> apply(Matrix<T> x) const {
    if (keep.size() != 0) x.array() *= keep.array();
    return x;
  }
};

template <class T>
struct FeedForwardCache {
  Matrix<T> input, hidden_pre;
};

template <class T>
Matrix<T> feed_forward(const Matrix<T>& x, const FeedForwardWeights<T>& w, FeedForwardCache<T>* cache) {
  Matrix<T> pre = linear(x, w.w1, w.b1);
  Matrix<T> out = linear(relu(pre), w.w2, w.b2);
  if (cache) {
    cache->input = x;
    cache->hidden_pre = std::move(pre);
  }
  return out;
}

template <class T>
Matrix<T> feed_forward_backward(const FeedForwardCache<T>& cache, const FeedForwardWeights<T>& w,
                                const Matrix<T>& dout, FeedForwardWeights<T>& g) {
  Matrix<T> dhidden = linear_backward(relu(cache.hidden_pre), w.w2, dout, g.w2, &g.b2);
  Matrix<T> dpre = relu_backward(cache.hidden_pre, dhidden);
  return linear_backward(cache.input, w.w1, dpre, g.w1, &g.b1);
}

template <class T>
struct EncoderBlockCache {
  MultiHeadCache<T> attention;
  Dropout<T> attention_drop, ffn_drop;
  LayerNormCache<T> attention_norm, ffn_norm;
  FeedForwardCache<T> ffn;
};

template <class T>
struct DecoderBlockCache {
  MultiHeadCache<T> self_attention, cross_attention;
  Dropout<T> self_drop, cross_drop, ffn_drop;
  LayerNormCache<T> self_norm, cross_norm, ffn_norm;
  FeedForwardCache<T> ffn;
};

template <class T>
struct ModelCache {
  Matrix<T> interaction_input, exercise_input;  // embedding rows + positions, before projection
  std::vector<EncoderBlockCache<T>> encoder;
  std::vector<DecoderBlockCache<T>> decoder;
};

// The whole graph. `cache` and `rng` are optional.
template <class T>
class Network {
 public:
  Network(const ParameterSet<T>& params, const ModelConfig& config, Rng* rng)
      : params_(params), config_(config), rng_(rng), mask_(causal_mask(config.k)) {}

  Matrix<T> encode(const Matrix<T>& input, ForwardTrace<T>* trace, ModelCache<T>* cache) const {
    Matrix<T> x = input;
    for (std::size_t b = 0; b < params_.encoder.size(); ++b) {
      const auto& w = params_.encoder[b];
      EncoderBlockCache<T> local;
      EncoderBlockCache<T>& c = cache ? cache->encoder.emplace_back() : local;
      auto attn = multi_head(x, x, w.attention, mask_, config_.h, config_.scale_full_d, cache ? &c.attention : nullptr);
      c.attention_drop.sample(x.rows(), x.cols(), config_.dropout, rng_);
      Matrix<T> y = layer_norm<T>(x + c.attention_drop.apply(std::move(attn.output)), w.attention_norm.gamma,
                                  w.attention_norm.beta, T(kLayerNormEps), cache ? &c.attention_norm : nullptr);
      Matrix<T> f = feed_forward(y, w.ffn, cache ? &c.ffn : nullptr);
      c.ffn_drop.sample(y.rows(), y.cols(), config_.dropout, rng_);
      x = layer_norm<T>(y + c.ffn_drop.apply(std::move(f)), w.ffn_norm.gamma, w.ffn_norm.beta, T(kLayerNormEps),
                        cache ? &c.ffn_norm : nullptr);
      if (trace) trace->attention[b].encoder_self = std::move(attn.weights);
    }
    return x;
  }

  Matrix<T> decode(const Matrix<T>& input, const Matrix<T>& memory, ForwardTrace<T>* trace,
                   ModelCache<T>* cache) const {
    Matrix<T> x = input;
    for (std::size_t b = 0; b < params_.decoder.size(); ++b) {
      const auto& w = params_.decoder[b];
      DecoderBlockCache<T> local;
      DecoderBlockCache<T>& c = cache ? cache->decoder.emplace_back() : local;
      auto self = multi_head(x, x, w.attention, mask_, config_.h, config_.scale_full_d,
                             cache ? &c.self_attention : nullptr);
      c.self_drop.sample(x.rows(), x.cols(), config_.dropout, rng_);
      Matrix<T> y = layer_norm<T>(x + c.self_drop.apply(std::move(self.output)), w.self_norm.gamma,
                                  w.self_norm.beta, T(kLayerNormEps), cache ? &c.self_norm : nullptr);
      auto cross = multi_head(y, memory, w.attention, mask_, config_.h, config_.scale_full_d,
                              cache ? &c.cross_attention : nullptr);
      c.cross_drop.sample(y.rows(), y.cols(), config_.dropout, rng_);
      Matrix<T> z = layer_norm<T>(y + c.cross_drop.apply(std::move(cross.output)), w.cross_norm.gamma,
                                  w.cross_norm.beta, T(kLayerNormEps), cache ? &c.cross_norm : nullptr);
      Matrix<T> f = feed_forward(z, w.ffn, cache ? &c.ffn : nullptr);
      c.ffn_drop.sample(z.rows(), z.cols(), config_.dropout, rng_);
      x = layer_norm<T>(z + c.ffn_drop.apply(std::move(f)), w.ffn_norm.gamma, w.ffn_norm.beta, T(kLayerNormEps),
                        cache ? &c.ffn_norm : nullptr);
      if (trace) {
        trace->attention[b].decoder_self = std::move(self.weights);
        trace->attention[b].decoder_cross = std::move(cross.weights);
      }
    }
    return x;
  }

  std::vector<T> head(const Matrix<T>& decoded) const {
    Matrix<T> logits = linear(decoded, params_.head_weight, params_.head_bias);
    return std::vector<T>(logits.data(), logits.data() + logits.size());
  }

  ForwardTrace<T> run(const EncodedWindow& window, ModelCache<T>* cache) const {
    check_window(window, config_);
    const Matrix<T> positions = positional_table<T>(config_.k, config_.d);
    ForwardTrace<T> trace;
    trace.attention.resize(static_cast<std::size_t>(config_.n_blocks));

    Matrix<T> interaction_input = gather_rows<T>(window.interaction_tokens, params_.interaction_embedding, positions);
    Matrix<T> exercise_input = gather_rows<T>(window.query_tokens, params_.exercise_embedding, positions);
    trace.interactions_embedded = linear(interaction_input, params_.interaction_projection);
    trace.exercises_embedded = linear(exercise_input, params_.exercise_projection);
    if (cache) {
      cache->interaction_input = std::move(interaction_input);
      cache->exercise_input = std::move(exercise_input);
    }
    trace.encoder_output = encode(trace.interactions_embedded, &trace, cache);
    trace.decoder_output = decode(trace.exercises_embedded, trace.encoder_output, &trace, cache);
    trace.logits = head(trace.decoder_output);
    trace.probabilities.resize(trace.logits.size());
    for (std::size_t t = 0; t < trace.logits.size(); ++t) trace.probabilities[t] = sigmoid(trace.logits[t]);
    return trace;
  }

  void backward(const EncodedWindow& window, const ForwardTrace<T>& trace, const ModelCache<T>& cache,
                std::span<const T> dprob, ParameterSet<T>& g) const {
    const auto k = static_cast<Eigen::Index>(dprob.size());
    Matrix<T> dlogit(k, 1);
    for (Eigen::Index t = 0; t < k; ++t) {
      const T p = trace.probabilities[static_cast<std::size_t>(t)];
      dlogit(t, 0) = dprob[static_cast<std::size_t>(t)] * p * (T(1) - p);
    }
    Matrix<T> dx = linear_backward(trace.decoder_output, params_.head_weight, dlogit, g.head_weight, &g.head_bias);

    Matrix<T> dmemory = Matrix<T>::Zero(trace.encoder_output.rows(), trace.encoder_output.cols());
    for (std::size_t b = params_.decoder.size(); b-- > 0;) {
      const auto& w = params_.decoder[b];
      auto& gw = g.decoder[b];
      const auto& c = cache.decoder[b];
      Matrix<T> dz = layer_norm_backward(c.ffn_norm, w.ffn_norm.gamma, dx, gw.ffn_norm.gamma, gw.ffn_norm.beta);
      dz += feed_forward_backward(c.ffn, w.ffn, c.ffn_drop.apply(dz), gw.ffn);
      Matrix<T> dy = layer_norm_backward(c.cross_norm, w.cross_norm.gamma, dz, gw.cross_norm.gamma, gw.cross_norm.beta);
      Matrix<T> dq, dkv;
      multi_head_backward(c.cross_attention, w.attention, c.cross_drop.apply(dy), config_.h, gw.attention, dq, dkv);
      dy += dq;
      dmemory += dkv;
      dx = layer_norm_backward(c.self_norm, w.self_norm.gamma, dy, gw.self_norm.gamma, gw.self_norm.beta);
      multi_head_backward(c.self_attention, w.attention, c.self_drop.apply(dx), config_.h, gw.attention, dq, dkv);
      dx += dq + dkv;
    }
    Matrix<T> dexercise = std::move(dx);

    dx = std::move(dmemory);
    for (std::size_t b = params_.encoder.size(); b-- > 0;) {
      const auto& w = params_.encoder[b];
      auto& gw = g.encoder[b];
      const auto& c = cache.encoder[b];
      Matrix<T> dy = layer_norm_backward(c.ffn_norm, w.ffn_norm.gamma, dx, gw.ffn_norm.gamma, gw.ffn_norm.beta);
      dy += feed_forward_backward(c.ffn, w.ffn, c.ffn_drop.apply(dy), gw.ffn);
      dx = layer_norm_backward(c.attention_norm, w.attention_norm.gamma, dy, gw.attention_norm.gamma,
                               gw.attention_norm.beta);
      Matrix<T> dq, dkv;
      multi_head_backward(c.attention, w.attention, c.attention_drop.apply(dx), config_.h, gw.attention, dq, dkv);
      dx += dq + dkv;
    }

    Matrix<T> dinteraction_input =
        linear_backward(cache.interaction_input, params_.interaction_projection, dx, g.interaction_projection);
    Matrix<T> dexercise_input =
        linear_backward(cache.exercise_input, params_.exercise_projection, dexercise, g.exercise_projection);
    scatter_rows<T>(window.interaction_tokens, dinteraction_input, g.interaction_embedding);
    scatter_rows<T>(window.query_tokens, dexercise_input, g.exercise_embedding);
  }

 private:
  const ParameterSet<T>& params_;
  const ModelConfig& config_;
  Rng* rng_;
  Mask mask_;
};

}  // namespace

void check_window(const EncodedWindow& window, const ModelConfig& config) {
  const auto k = static_cast<std::size_t>(config.k);
  if (window.interaction_tokens.size() != k || window.query_tokens.size() != k || window.targets.size() != k ||
      window.valid_mask.size() != k)
    throw ShapeError("window length " + std::to_string(window.interaction_tokens.size()) +
                     " does not match k = " + std::to_string(config.k));
  for (std::size_t t = 0; t < k; ++t) {
    if (window.interaction_tokens[t] < 0 || window.interaction_tokens[t] > 2 * config.e)
      throw RangeError("interaction token " + std::to_string(window.interaction_tokens[t]) + " outside [0, " +
                       std::to_string(2 * config.e) + "]");
    if (window.query_tokens[t] < 0 || window.query_tokens[t] > config.e)
      throw RangeError("query token " + std::to_string(window.query_tokens[t]) + " outside [0, " +
                       std::to_string(config.e) + "]");
  }
}

template <class T>
Matrix<T> encode(const Matrix<T>& interactions_embedded, const ParameterSet<T>& params, const ModelConfig& config) {
  Network<T> net(params, config, nullptr);
  return net.encode(interactions_embedded, nullptr, nullptr);
}

template <class T>
std::vector<T> decode(const Matrix<T>& exercises_embedded, const Matrix<T>& encoder_output,
                      const ParameterSet<T>& params, const ModelConfig& config) {
  Network<T> net(params, config, nullptr);
  return net.head(net.decode(exercises_embedded, encoder_output, nullptr, nullptr));
}

template <class T>
ForwardTrace<T> forward(const EncodedWindow& window, const ParameterSet<T>& params, const ModelConfig& config) {
  return Network<T>(params, config, nullptr).run(window, nullptr);
}

template <class T>
T window_loss(const EncodedWindow& window, const ParameterSet<T>& params, const ModelConfig& config) {
  auto trace = forward(window, params, config);
  return bce_masked<T>(trace.probabilities, window.targets, window.valid_mask);
}

template <class T>
T loss_and_gradient(const EncodedWindow& window, const ParameterSet<T>& params, const ModelConfig& config,
                    ParameterSet<T>& grads, T scale, Rng* dropout_rng) {
  Network<T> net(params, config, config.dropout > 0.0 ? dropout_rng : nullptr);
  ModelCache<T> cache;
  ForwardTrace<T> trace = net.run(window, &cache);
  const T loss = bce_masked<T>(trace.probabilities, window.targets, window.valid_mask);
  std::vector<T> dprob = bce_masked_backward<T>(trace.probabilities, window.targets, window.valid_mask);
  for (auto& v : dprob) v *= scale;
  net.backward(window, trace, cache, dprob, grads);
  if (!std::isfinite(loss)) throw NumericError("non-finite loss");
  return loss;
}

#define DSAKT_INSTANTIATE_MODEL(T)                                                                                   \
  template struct ParameterSet<T>;                                                                                  \
  template Matrix<T> positional_table<T>(int, int);                                                                 \
  template ParameterSet<T> init_params<T>(const ModelConfig&, std::uint64_t);                                       \
  template Matrix<T> embed_tokens<T>(std::span<const int>, const Matrix<T>&, const Matrix<T>&, const Matrix<T>&);   \
  template Matrix<T> embed_interactions<T>(std::span<const int>, const ParameterSet<T>&, const Matrix<T>&);          \
  template Matrix<T> embed_exercises<T>(std::span<const int>, const ParameterSet<T>&, const Matrix<T>&);             \
  template MultiHeadResult<T> multi_head<T>(const Matrix<T>&, const Matrix<T>&, const AttentionWeights<T>&,         \
                                            const Mask&, int, bool, MultiHeadCache<T>*);                            \
  template void multi_head_backward<T>(const MultiHeadCache<T>&, const AttentionWeights<T>&, const Matrix<T>&, int, \
                                       AttentionWeights<T>&, Matrix<T>&, Matrix<T>&);                               \
  template Matrix<T> encode<T>(const Matrix<T>&, const ParameterSet<T>&, const ModelConfig&);                       \
  template std::vector<T> decode<T>(const Matrix<T>&, const Matrix<T>&, const ParameterSet<T>&, const ModelConfig&); \
  template ForwardTrace<T> forward<T>(const EncodedWindow&, const ParameterSet<T>&, const ModelConfig&);            \
  template T window_loss<T>(const EncodedWindow&, const ParameterSet<T>&, const ModelConfig&);                      \
  template T loss_and_gradient<T>(const EncodedWindow&, const ParameterSet<T>&, const ModelConfig&, ParameterSet<T>&, \
                                  T, Rng*);

DSAKT_INSTANTIATE_MODEL(float)
DSAKT_INSTANTIATE_MODEL(double)

#undef DSAKT_INSTANTIATE_MODEL

}  // namespace dsakt
