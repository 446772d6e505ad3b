#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "dsakt/model.hpp"
#include "dsakt/synthetic.hpp"
#include "dsakt/training.hpp"

namespace dsakt::cli {

/// Flat run configuration. Every field is also a `--flag` of the same name (underscores become dashes).
struct RunConfig {
  std::optional<std::string> data;
  std::optional<std::string> out;
  std::optional<std::string> checkpoint;
  std::optional<std::string> oracle;
  std::string adapter = "canonical";
  std::optional<std::uint64_t> seed;

  std::optional<int> k;
  int d = 64;
  int h = 1;
  int d_ff = 0;
  int n_blocks = 1;
  double dropout = 0.0;
  bool scale_full_d = false;

  int batch_size = 128;
  int epochs = 100;
  int warmup = 60;
  double train_ratio = 0.8;
  double val_fraction = 0.1;

  int users = 0;
  int len = 0;
  int skills = 10;
  int exercises_per_skill = 2;
  double p_init = 0.4;
  double p_learn = 0.3;
  double p_slip = 0.1;
  double p_guess = 0.2;

  std::optional<std::string> history;
  std::optional<std::string> exercise;
  std::string split = "test";
  int limit = 0;  // 0 = every window

  /// Overwrites fields named in `j`; unknown keys and wrong types are ConfigError.
  void merge(const nlohmann::json& j);
  nlohmann::ordered_json to_json() const;

  std::uint64_t require_seed() const;
  int require_k() const;
  std::filesystem::path require_path(const std::optional<std::string>& field, const char* name) const;

  ModelConfig model(int e) const;
  TrainConfig training() const;
  SyntheticSkillModel skill_model() const;
};

RunConfig load_config_file(const std::filesystem::path& path);

}  // namespace dsakt::cli
