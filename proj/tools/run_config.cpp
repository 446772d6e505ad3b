#include "run_config.hpp"

#include <fstream>

#include "dsakt/error.hpp"

namespace dsakt::cli {

namespace {

template <class T>
void take(const nlohmann::json& j, const std::string& key, T& field) {
  try {
    field = j.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type: " + j.dump());
  }
}

template <class T>
void take(const nlohmann::json& j, const std::string& key, std::optional<T>& field) {
  if (j.is_null()) {
    field.reset();
    return;
  }
  T value{};
  take(j, key, value);
  field = value;
}

template <class T>
void put(nlohmann::ordered_json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

}  // namespace

void RunConfig::merge(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "data") take(value, key, data);
    else if (key == "out") take(value, key, out);
    else if (key == "checkpoint") take(value, key, checkpoint);
    else if (key == "oracle") take(value, key, oracle);
    else if (key == "adapter") take(value, key, adapter);
    else if (key == "seed") take(value, key, seed);
    else if (key == "k") take(value, key, k);
    else if (key == "d") take(value, key, d);
    else if (key == "h") take(value, key, h);
    else if (key == "d_ff") take(value, key, d_ff);
    else if (key == "n_blocks") take(value, key, n_blocks);
    else if (key == "dropout") take(value, key, dropout);
    else if (key == "scale_full_d") take(value, key, scale_full_d);
    else if (key == "batch_size") take(value, key, batch_size);
    else if (key == "epochs") take(value, key, epochs);
    else if (key == "warmup") take(value, key, warmup);
    else if (key == "train_ratio") take(value, key, train_ratio);
    else if (key == "val_fraction") take(value, key, val_fraction);
    else if (key == "users") take(value, key, users);
    else if (key == "len") take(value, key, len);
    else if (key == "skills") take(value, key, skills);
    else if (key == "exercises_per_skill") take(value, key, exercises_per_skill);
    else if (key == "p_init") take(value, key, p_init);
    else if (key == "p_learn") take(value, key, p_learn);
    else if (key == "p_slip") take(value, key, p_slip);
    else if (key == "p_guess") take(value, key, p_guess);
    else if (key == "history") take(value, key, history);
    else if (key == "exercise") take(value, key, exercise);
    else if (key == "split") take(value, key, split);
    else if (key == "limit") take(value, key, limit);
    else throw ConfigError("unknown config key '" + key + "'");
  }
}

nlohmann::ordered_json RunConfig::to_json() const {
  nlohmann::ordered_json j;
  put(j, "data", data);
  put(j, "oracle", oracle);
  j["adapter"] = adapter;
  put(j, "seed", seed);
  put(j, "k", k);
  j["d"] = d;
  j["h"] = h;
  j["d_ff"] = d_ff;
  j["n_blocks"] = n_blocks;
  j["dropout"] = dropout;
  j["scale_full_d"] = scale_full_d;
  j["batch_size"] = batch_size;
  j["epochs"] = epochs;
  j["warmup"] = warmup;
  j["train_ratio"] = train_ratio;
  j["val_fraction"] = val_fraction;
  return j;
}

std::uint64_t RunConfig::require_seed() const {
  if (!seed) throw ConfigError("--seed is required");
  return *seed;
}

int RunConfig::require_k() const {
  if (!k) throw ConfigError("--k is required");
  return *k;
}

std::filesystem::path RunConfig::require_path(const std::optional<std::string>& field, const char* name) const {
  if (!field || field->empty()) throw ConfigError(std::string("--") + name + " is required");
  return *field;
}

ModelConfig RunConfig::model(int e) const {
  ModelConfig c;
  c.e = e;
  c.k = require_k();
  c.d = d;
  c.h = h;
  c.d_ff = d_ff;
  c.n_blocks = n_blocks;
  c.dropout = dropout;
  c.scale_full_d = scale_full_d;
  c.validate();
  return c;
}

TrainConfig RunConfig::training() const {
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) throw ConfigError("val_fraction must lie in (0, 1)");
  TrainConfig t;
  t.batch_size = static_cast<std::size_t>(batch_size);
  t.epochs = epochs;
  t.seed = require_seed();
  t.warmup_steps = warmup;
  t.validate();
  return t;
}

SyntheticSkillModel RunConfig::skill_model() const {
  auto m = SyntheticSkillModel::uniform(skills, exercises_per_skill, {p_init, p_learn, p_slip, p_guess});
  m.validate();
  return m;
}

RunConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& ex) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + ex.what());
  }
  RunConfig c;
  c.merge(j);
  return c;
}

}  // namespace dsakt::cli
