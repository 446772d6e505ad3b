#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dsakt/datastore.hpp"
#include "dsakt/model.hpp"

namespace dsakt {

/// Mann-Whitney AUC via average ranks: P(score_pos > score_neg) + 0.5 P(tie).
/// Throws EmptyInputError for no scores, UndefinedMetricError when one class is absent.
double auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

/// auc() over the synthetic generator's Bayes-filter probabilities.
double oracle_auc(std::span<const double> oracle_probs, std::span<const std::uint8_t> labels);

struct EvalReport {
  double auc = 0.0;
  double accuracy = 0.0;  // score >= 0.5 predicts correct
  std::size_t positions = 0;
  double mean_bce = 0.0;

  std::string to_json() const;
};

/// Scores pooled over the valid positions of every window, in window order.
struct PooledPredictions {
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;
};

template <class T>
PooledPredictions score_windows(const ParameterSet<T>& params, const ModelConfig& config,
                                std::span<const EncodedWindow> windows);

/// Pools values laid out like window targets (see window_values) over valid positions.
std::vector<double> pool_valid(std::span<const EncodedWindow> windows, std::span<const std::vector<double>> values);

EvalReport evaluate_scores(std::span<const double> scores, std::span<const std::uint8_t> labels);

template <class T>
EvalReport evaluate(const ParameterSet<T>& params, const ModelConfig& config, std::span<const EncodedWindow> windows);

enum class AttentionStage { encoder_self, decoder_self, decoder_cross };
const char* stage_name(AttentionStage stage);

struct AttentionRecord {
  std::size_t window = 0;
  int block = 0;
  AttentionStage stage = AttentionStage::encoder_self;
  int head = 0;
  int query_pos = 0;
  int key_pos = 0;
  float weight = 0.0f;
};

/// Weights for every valid query position and every key it may attend (key <= query).
std::vector<AttentionRecord> attention_records(const ParameterSet<float>& params, const ModelConfig& config,
                                               std::span<const EncodedWindow> windows);

/// CSV with header `window,block,stage,head,query_pos,key_pos,weight`; weights in shortest round-trip form.
void write_attention(std::ostream& out, std::span<const AttentionRecord> records);

void export_attention(const ParameterSet<float>& params, const ModelConfig& config,
                      std::span<const EncodedWindow> windows, const std::filesystem::path& path);

}  // namespace dsakt
