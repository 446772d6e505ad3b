#include "dsakt/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>

#include <json.hpp>

#include "dsakt/error.hpp"

namespace dsakt {

double auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size())
    throw ShapeError("auc: " + std::to_string(scores.size()) + " scores vs " + std::to_string(labels.size()) +
                     " labels");
  if (scores.empty()) throw EmptyInputError("auc: no scores");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Rank sum of positives with tied groups sharing their average rank (kept doubled to stay integral).
  std::uint64_t positives = 0;
  std::uint64_t rank_sum_x2 = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const std::uint64_t avg_rank_x2 = i + 1 + j;  // ranks i+1 .. j
    for (std::size_t t = i; t < j; ++t) {
      if (labels[order[t]]) {
        ++positives;
        rank_sum_x2 += avg_rank_x2;
      }
    }
    i = j;
  }
  const std::uint64_t negatives = n - positives;
  if (positives == 0 || negatives == 0) throw UndefinedMetricError("auc: only one label class present");
  const double u = (static_cast<double>(rank_sum_x2) - static_cast<double>(positives * (positives + 1))) / 2.0;
  return u / (static_cast<double>(positives) * static_cast<double>(negatives));
}

double oracle_auc(std::span<const double> oracle_probs, std::span<const std::uint8_t> labels) {
  return auc(oracle_probs, labels);
}

std::string EvalReport::to_json() const {
  return nlohmann::ordered_json{{"auc", auc}, {"accuracy", accuracy}, {"positions", positions}, {"mean_bce", mean_bce}}
      .dump();
}

template <class T>
PooledPredictions score_windows(const ParameterSet<T>& params, const ModelConfig& config,
                                std::span<const EncodedWindow> windows) {
  PooledPredictions pooled;
  for (const auto& w : windows) {
    const auto trace = forward(w, params, config);
    for (std::size_t t = 0; t < w.valid_mask.size(); ++t) {
      if (!w.valid_mask[t]) continue;
      pooled.scores.push_back(static_cast<double>(trace.probabilities[t]));
      pooled.labels.push_back(w.targets[t]);
    }
  }
  return pooled;
}

std::vector<double> pool_valid(std::span<const EncodedWindow> windows, std::span<const std::vector<double>> values) {
  if (windows.size() != values.size())
    throw ShapeError("pool_valid: " + std::to_string(windows.size()) + " windows vs " +
                     std::to_string(values.size()) + " value rows");
  std::vector<double> out;
  for (std::size_t w = 0; w < windows.size(); ++w) {
    if (values[w].size() != windows[w].valid_mask.size()) throw ShapeError("pool_valid: row length mismatch");
    for (std::size_t t = 0; t < values[w].size(); ++t)
      if (windows[w].valid_mask[t]) out.push_back(values[w][t]);
  }
  return out;
}

EvalReport evaluate_scores(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  EvalReport report;
  report.auc = auc(scores, labels);
  report.positions = scores.size();
  std::size_t hits = 0;
  double bce = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= 0.5;
    hits += predicted == (labels[i] != 0);
    const double p = std::clamp(scores[i], kProbabilityClip, 1.0 - kProbabilityClip);
    bce -= labels[i] ? std::log(p) : std::log(1.0 - p);
  }
  report.accuracy = static_cast<double>(hits) / static_cast<double>(scores.size());
  report.mean_bce = bce / static_cast<double>(scores.size());
  return report;
}

template <class T>
EvalReport evaluate(const ParameterSet<T>& params, const ModelConfig& config, std::span<const EncodedWindow> windows) {
  const auto pooled = score_windows(params, config, windows);
  return evaluate_scores(pooled.scores, pooled.labels);
}

const char* stage_name(AttentionStage stage) {
  switch (stage) {
    case AttentionStage::encoder_self:
      return "encoder_self";
    case AttentionStage::decoder_self:
      return "decoder_self";
    case AttentionStage::decoder_cross:
      return "decoder_cross";
  }
  return "unknown";
}

std::vector<AttentionRecord> attention_records(const ParameterSet<float>& params, const ModelConfig& config,
                                               std::span<const EncodedWindow> windows) {
  std::vector<AttentionRecord> records;
  for (std::size_t w = 0; w < windows.size(); ++w) {
    const auto& window = windows[w];
    const auto trace = forward(window, params, config);
    for (std::size_t b = 0; b < trace.attention.size(); ++b) {
      const auto& block = trace.attention[b];
      const std::pair<AttentionStage, const std::vector<Matrix<float>>*> stages[] = {
          {AttentionStage::encoder_self, &block.encoder_self},
          {AttentionStage::decoder_self, &block.decoder_self},
          {AttentionStage::decoder_cross, &block.decoder_cross}};
      for (const auto& [stage, heads] : stages) {
        for (std::size_t head = 0; head < heads->size(); ++head) {
          const Matrix<float>& weights = (*heads)[head];
          for (int q = 0; q < config.k; ++q) {
            if (!window.valid_mask[static_cast<std::size_t>(q)]) continue;
            for (int key = 0; key <= q; ++key)
              records.push_back({w, static_cast<int>(b), stage, static_cast<int>(head), q, key, weights(q, key)});
          }
        }
      }
    }
  }
  return records;
}

void write_attention(std::ostream& out, std::span<const AttentionRecord> records) {
  out << "window,block,stage,head,query_pos,key_pos,weight\n";
  char buf[64];
  for (const auto& r : records) {
    auto res = std::to_chars(buf, buf + sizeof(buf), r.weight);
    out << r.window << ',' << r.block << ',' << stage_name(r.stage) << ',' << r.head << ',' << r.query_pos << ','
        << r.key_pos << ',' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf)) << '\n';
  }
}

void export_attention(const ParameterSet<float>& params, const ModelConfig& config,
                      std::span<const EncodedWindow> windows, const std::filesystem::path& path) {
  const auto records = attention_records(params, config, windows);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open attention dump for writing: " + path.string());
  write_attention(out, records);
  if (!out) throw IoError("failed writing attention dump: " + path.string());
}

template PooledPredictions score_windows<float>(const ParameterSet<float>&, const ModelConfig&,
                                                std::span<const EncodedWindow>);
template PooledPredictions score_windows<double>(const ParameterSet<double>&, const ModelConfig&,
                                                 std::span<const EncodedWindow>);
template EvalReport evaluate<float>(const ParameterSet<float>&, const ModelConfig&, std::span<const EncodedWindow>);
template EvalReport evaluate<double>(const ParameterSet<double>&, const ModelConfig&, std::span<const EncodedWindow>);

}  // namespace dsakt
