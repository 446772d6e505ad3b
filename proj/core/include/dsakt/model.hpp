#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dsakt/datastore.hpp"
#include "dsakt/kernels.hpp"
#include "dsakt/random.hpp"

namespace dsakt {

struct ModelConfig {
  int e = 0;         // exercise vocabulary size
  int k = 0;         // window length
  int d = 0;         // latent width
  int h = 1;         // attention heads; must divide d
  int d_ff = 0;      // FFN inner width, 0 means d
  int n_blocks = 1;  // encoder and decoder blocks
  double dropout = 0.0;
  bool scale_full_d = false;  // scale scores by 1/sqrt(d) instead of 1/sqrt(d/h)

  int ffn_width() const { return d_ff > 0 ? d_ff : d; }
  /// Throws ConfigError describing the first violated constraint.
  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

template <class T>
struct AttentionWeights {
  Matrix<T> query, key, value, output;  // each [d, d]; no biases
};

template <class T>
struct FeedForwardWeights {
  Matrix<T> w1, b1, w2, b2;  // [d, d_ff], [1, d_ff], [d_ff, d], [1, d]
};

template <class T>
struct NormWeights {
  Matrix<T> gamma, beta;  // [1, d]
};

template <class T>
struct EncoderBlockWeights {
  AttentionWeights<T> attention;
  NormWeights<T> attention_norm;
  FeedForwardWeights<T> ffn;
  NormWeights<T> ffn_norm;
};

/// One attention weight set serves both the self- and the cross-attention stage.
template <class T>
struct DecoderBlockWeights {
  AttentionWeights<T> attention;
  NormWeights<T> self_norm;
  NormWeights<T> cross_norm;
  FeedForwardWeights<T> ffn;
  NormWeights<T> ffn_norm;
};

template <class T>
struct ParameterSet {
  Matrix<T> interaction_embedding;   // [2e+1, d]
  Matrix<T> exercise_embedding;      // [e+1, d]
  Matrix<T> interaction_projection;  // [d, d]
  Matrix<T> exercise_projection;     // [d, d]
  std::vector<EncoderBlockWeights<T>> encoder;
  std::vector<DecoderBlockWeights<T>> decoder;
  Matrix<T> head_weight;  // [d, 1]
  Matrix<T> head_bias;    // [1, 1]

  /// All tensors at their configured shapes, filled with zeros.
  static ParameterSet zeros(const ModelConfig& config);

  std::size_t element_count() const;

  template <class U>
  ParameterSet<U> cast() const;
};

/// Visits every tensor as (name, matrix) in a fixed order. Works on const and mutable sets.
template <class Params, class Fn>
void for_each_tensor(Params& params, Fn&& fn) {
  auto attention = [&](const std::string& p, auto& a) {
    fn(p + ".query", a.query);
    fn(p + ".key", a.key);
    fn(p + ".value", a.value);
    fn(p + ".output", a.output);
  };
  auto norm = [&](const std::string& p, auto& n) {
    fn(p + ".gamma", n.gamma);
    fn(p + ".beta", n.beta);
  };
  auto ffn = [&](const std::string& p, auto& f) {
    fn(p + ".w1", f.w1);
    fn(p + ".b1", f.b1);
    fn(p + ".w2", f.w2);
    fn(p + ".b2", f.b2);
  };
  fn(std::string("interaction_embedding"), params.interaction_embedding);
  fn(std::string("exercise_embedding"), params.exercise_embedding);
  fn(std::string("interaction_projection"), params.interaction_projection);
  fn(std::string("exercise_projection"), params.exercise_projection);
  for (std::size_t b = 0; b < params.encoder.size(); ++b) {
    const std::string p = "encoder." + std::to_string(b);
    attention(p + ".attention", params.encoder[b].attention);
    norm(p + ".attention_norm", params.encoder[b].attention_norm);
    ffn(p + ".ffn", params.encoder[b].ffn);
    norm(p + ".ffn_norm", params.encoder[b].ffn_norm);
  }
  for (std::size_t b = 0; b < params.decoder.size(); ++b) {
    const std::string p = "decoder." + std::to_string(b);
    attention(p + ".attention", params.decoder[b].attention);
    norm(p + ".self_norm", params.decoder[b].self_norm);
    norm(p + ".cross_norm", params.decoder[b].cross_norm);
    ffn(p + ".ffn", params.decoder[b].ffn);
    norm(p + ".ffn_norm", params.decoder[b].ffn_norm);
  }
  fn(std::string("head.weight"), params.head_weight);
  fn(std::string("head.bias"), params.head_bias);
}

template <class T>
std::size_t ParameterSet<T>::element_count() const {
  std::size_t n = 0;
  for_each_tensor(*this, [&](const std::string&, const Matrix<T>& m) { n += static_cast<std::size_t>(m.size()); });
  return n;
}

template <class T>
template <class U>
ParameterSet<U> ParameterSet<T>::cast() const {
  ParameterSet<U> out;
  out.encoder.resize(encoder.size());
  out.decoder.resize(decoder.size());
  std::vector<const Matrix<T>*> src;
  for_each_tensor(*this, [&](const std::string&, const Matrix<T>& m) { src.push_back(&m); });
  std::size_t i = 0;
  for_each_tensor(out, [&](const std::string&, Matrix<U>& m) { m = src[i++]->template cast<U>(); });
  return out;
}

/// Closed-form parameter count; the decoder's attention weights are counted once per block.
std::int64_t param_count(const ModelConfig& config);

/// Fixed sinusoidal table, 1-based position i and dimension j:
/// even j -> sin(i / 10000^(j/d)), odd j -> cos(i / 10000^((j-1)/d)).
template <class T>
Matrix<T> positional_table(int k, int d);

/// mask(t, s) = s <= t.
Mask causal_mask(int k);

/// Embeddings ~ N(0, 1/d), weight matrices ~ U(+-sqrt(6/(n_in+n_out))), biases 0, gamma 1, beta 0.
template <class T>
ParameterSet<T> init_params(const ModelConfig& config, std::uint64_t seed);

/// (table[tokens] + positions) * projection. Tokens outside [0, table.rows()) are a RangeError.
template <class T>
Matrix<T> embed_tokens(std::span<const int> tokens, const Matrix<T>& table, const Matrix<T>& positions,
                       const Matrix<T>& projection);
template <class T>
Matrix<T> embed_interactions(std::span<const int> tokens, const ParameterSet<T>& params, const Matrix<T>& positions);
template <class T>
Matrix<T> embed_exercises(std::span<const int> tokens, const ParameterSet<T>& params, const Matrix<T>& positions);

template <class T>
struct MultiHeadCache {
  Matrix<T> query_input, key_value_input;
  Matrix<T> q, k, v;  // projected, [k, d]
  std::vector<Matrix<T>> weights;  // [h] x [k, k]
  Matrix<T> concat;
  T scale = 1;
};

template <class T>
struct MultiHeadResult {
  Matrix<T> output;                // [k, d]
  std::vector<Matrix<T>> weights;  // [h] x [k, k]
};

/// Masked multi-head attention: queries from `query_input`, keys/values from `key_value_input`.
template <class T>
MultiHeadResult<T> multi_head(const Matrix<T>& query_input, const Matrix<T>& key_value_input,
                              const AttentionWeights<T>& weights, const Mask& mask, int heads,
                              bool scale_full_d = false, MultiHeadCache<T>* cache = nullptr);

/// Accumulates weight gradients; writes input gradients into dquery / dkey_value.
template <class T>
void multi_head_backward(const MultiHeadCache<T>& cache, const AttentionWeights<T>& weights, const Matrix<T>& dout,
                         int heads, AttentionWeights<T>& grads, Matrix<T>& dquery, Matrix<T>& dkey_value);

template <class T>
struct BlockAttention {
  std::vector<Matrix<T>> encoder_self;   // [h] x [k, k]
  std::vector<Matrix<T>> decoder_self;
  std::vector<Matrix<T>> decoder_cross;
};

template <class T>
struct ForwardTrace {
  Matrix<T> interactions_embedded;  // I~
  Matrix<T> exercises_embedded;     // E~
  Matrix<T> encoder_output;         // T~
  Matrix<T> decoder_output;         // input to the prediction head
  std::vector<T> logits;            // r~
  std::vector<T> probabilities;     // r^
  std::vector<BlockAttention<T>> attention;
};

/// Encoder stack over the embedded interaction stream.
template <class T>
Matrix<T> encode(const Matrix<T>& interactions_embedded, const ParameterSet<T>& params, const ModelConfig& config);

/// Decoder stack plus prediction head; returns logits.
template <class T>
std::vector<T> decode(const Matrix<T>& exercises_embedded, const Matrix<T>& encoder_output,
                      const ParameterSet<T>& params, const ModelConfig& config);

/// Inference (dropout off).
template <class T>
ForwardTrace<T> forward(const EncodedWindow& window, const ParameterSet<T>& params, const ModelConfig& config);

/// Masked BCE of one window without gradients.
template <class T>
T window_loss(const EncodedWindow& window, const ParameterSet<T>& params, const ModelConfig& config);

/// Forward and backward on one window. Adds `scale * dL/dtheta` into `grads` and returns L.
/// With `dropout_rng` set and config.dropout > 0, dropout is applied to every sub-layer output.
template <class T>
T loss_and_gradient(const EncodedWindow& window, const ParameterSet<T>& params, const ModelConfig& config,
                    ParameterSet<T>& grads, T scale = T(1), Rng* dropout_rng = nullptr);

/// Checks token ranges and window length against the configuration.
void check_window(const EncodedWindow& window, const ModelConfig& config);

}  // namespace dsakt
