#include "commands.hpp"

#include <charconv>
#include <fstream>
#include <iostream>
#include <string_view>

#include "dsakt/checkpoint.hpp"
#include "dsakt/error.hpp"
#include "dsakt/evaluation.hpp"

namespace dsakt::cli {

namespace fs = std::filesystem;

namespace {

fs::path output_dir(const RunConfig& config) {
  const fs::path dir = config.require_path(config.out, "out");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

std::ofstream open_output(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

ParsedLog read_log(const RunConfig& config, const Vocabulary* vocabulary = nullptr) {
  const fs::path path = config.require_path(config.data, "data");
  std::ifstream in(path);
  if (!in) throw IoError("cannot open data file: " + path.string());
  const LogFormat format = LogFormat::by_name(config.adapter);
  return vocabulary ? parse_interaction_log(in, format, *vocabulary) : parse_interaction_log(in, format);
}

struct Splits {
  std::vector<UserSequence> fit, validation, test;
};

// Test users first, then a validation slice of the remaining training users.
Splits split_users(const RunConfig& config, std::span<const UserSequence> sequences) {
  const std::uint64_t seed = config.require_seed();
  auto [train, test] = split_dataset(sequences, config.train_ratio, seed);
  auto [fit, validation] = split_dataset(train, 1.0 - config.val_fraction, seed + 1);
  return {std::move(fit), std::move(validation), std::move(test)};
}

std::vector<UserSequence> select_split(const RunConfig& config, std::span<const UserSequence> sequences) {
  if (config.split == "all") return {sequences.begin(), sequences.end()};
  auto s = split_users(config, sequences);
  if (config.split == "test") return std::move(s.test);
  if (config.split == "train") return std::move(s.fit);
  if (config.split == "val") return std::move(s.validation);
  throw ConfigError("unknown split '" + config.split + "' (expected test, train, val, all)");
}

std::vector<double> read_oracle(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open oracle file: " + path.string());
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
    if (ec != std::errc() || ptr != line.data() + line.size())
      throw FormatError("oracle value is not a number: '" + line + "'", line_no);
    values.push_back(v);
  }
  return values;
}

Checkpoint read_checkpoint(const RunConfig& config) {
  return load_checkpoint(config.require_path(config.checkpoint, "checkpoint"));
}

std::vector<EncodedWindow> limited(std::vector<EncodedWindow> windows, int limit) {
  if (limit < 0) throw ConfigError("limit must be >= 0");
  if (limit > 0 && windows.size() > static_cast<std::size_t>(limit)) windows.resize(static_cast<std::size_t>(limit));
  return windows;
}

}  // namespace

int cmd_gen(const RunConfig& config) {
  const std::uint64_t seed = config.require_seed();
  if (config.users < 1) throw ConfigError("--users must be >= 1");
  if (config.len < 2) throw ConfigError("--len must be >= 2");
  const auto model = config.skill_model();
  const fs::path dir = output_dir(config);

  const auto data = generate_synthetic(model, config.users, config.len, seed);
  const auto records = to_records(data);
  const fs::path log_path = dir / "interactions.csv", oracle_path = dir / "oracle.txt";
  {
    auto out = open_output(log_path, std::ios::out | std::ios::binary);
    write_interaction_log(out, records);
    finish(out, log_path);
  }
  {
    auto out = open_output(oracle_path, std::ios::out | std::ios::binary);
    for (const auto& probs : data.oracle_probs)
      for (double p : probs) out << format_double(p) << '\n';
    finish(out, oracle_path);
  }
  nlohmann::ordered_json summary{{"users", config.users},
                                 {"interactions", records.size()},
                                 {"exercises", data.vocabulary.size()},
                                 {"data", log_path.string()},
                                 {"oracle", oracle_path.string()}};
  std::cout << summary.dump() << std::endl;
  return 0;
}

int cmd_train(const RunConfig& config) {
  const ParsedLog log = read_log(config);
  const ModelConfig model = config.model(log.vocabulary.size());
  const TrainConfig training = config.training();
  const fs::path dir = output_dir(config);

  const Splits s = split_users(config, log.sequences);
  const auto train_windows = window_all(s.fit, model.k, model.e);
  const auto val_windows = window_all(s.validation, model.k, model.e);

  const fs::path log_path = dir / "epochs.jsonl";
  auto epoch_log = open_output(log_path, std::ios::out | std::ios::binary);
  const FitResult result = fit(train_windows, val_windows, model, training, [&](const EpochReport& r) {
    std::cout << to_json_line(r) << std::endl;
    epoch_log << to_json_line(r, false) << '\n';
    epoch_log.flush();
  });
  finish(epoch_log, log_path);

  save_checkpoint(result.best, model, log.vocabulary, dir / "checkpoint.bin");
  {
    const fs::path run_path = dir / "run.json";
    auto out = open_output(run_path);
    out << config.to_json().dump(2) << '\n';
    finish(out, run_path);
  }
  std::cerr << "dsakt: best epoch " << result.best_epoch << " (val_auc "
            << result.reports[static_cast<std::size_t>(result.best_epoch - 1)].val_auc << "); " << s.fit.size()
            << " train / " << s.validation.size() << " validation / " << s.test.size() << " test users; "
            << train_windows.size() << " train windows of k=" << model.k << "; checkpoint "
            << (dir / "checkpoint.bin").string() << '\n';
  return 0;
}

int cmd_eval(const RunConfig& config) {
  const Checkpoint ckpt = read_checkpoint(config);
  const ParsedLog log = read_log(config, &ckpt.vocabulary);
  const auto users = select_split(config, log.sequences);
  const auto windows = window_all(users, ckpt.config.k, ckpt.config.e);
  const EvalReport report = evaluate(ckpt.params, ckpt.config, windows);

  auto j = nlohmann::ordered_json::parse(report.to_json());
  j["split"] = config.split;
  j["windows"] = windows.size();
  if (config.oracle) {
    const auto oracle = read_oracle(*config.oracle);
    std::vector<std::vector<double>> laid_out;
    for (const auto& u : users) {
      std::vector<double> per_interaction;
      for (std::size_t row : u.source_rows) {
        if (row >= oracle.size())
          throw IoError("oracle file has " + std::to_string(oracle.size()) + " values but the data needs row " +
                        std::to_string(row + 1));
        per_interaction.push_back(oracle[row]);
      }
      for (auto& w : window_values(per_interaction, ckpt.config.k)) laid_out.push_back(std::move(w));
    }
    const auto pooled = pool_valid(windows, laid_out);
    const auto scored = score_windows(ckpt.params, ckpt.config, windows);
    j["oracle_auc"] = oracle_auc(pooled, scored.labels);
  }
  const std::string text = j.dump();
  std::cout << text << std::endl;
  if (config.out) {
    const fs::path path = output_dir(config) / "eval.json";
    auto out = open_output(path);
    out << text << '\n';
    finish(out, path);
  }
  return 0;
}

int cmd_predict(const RunConfig& config) {
  const Checkpoint ckpt = read_checkpoint(config);
  if (!config.history || config.history->empty()) throw ConfigError("--history is required and must not be empty");
  if (!config.exercise || config.exercise->empty()) throw ConfigError("--exercise is required");
  const auto& vocab = ckpt.vocabulary;
  const int e = ckpt.config.e, k = ckpt.config.k;

  std::vector<Interaction> history;
  for (const auto& item : split_delimited(*config.history, ',')) {
    const auto colon = item.rfind(':');
    if (colon == std::string::npos) throw ConfigError("history item '" + item + "' is not of the form id:0 or id:1");
    const std::string id = item.substr(0, colon), r = item.substr(colon + 1);
    if (r != "0" && r != "1") throw ConfigError("history item '" + item + "': response must be 0 or 1");
    history.push_back({vocab.index_of(id), static_cast<std::uint8_t>(r == "1")});
  }
  const int target = vocab.index_of(*config.exercise);
  // only the most recent k interactions fit in one window
  const std::size_t n = std::min(history.size(), static_cast<std::size_t>(k));
  const std::size_t first = history.size() - n;

  EncodedWindow w;
  const auto uk = static_cast<std::size_t>(k);
  w.interaction_tokens.assign(uk, 0);
  w.query_tokens.assign(uk, 0);
  w.targets.assign(uk, 0);
  w.valid_mask.assign(uk, 0);
  for (std::size_t t = 0; t < n; ++t) {
    const auto& x = history[first + t];
    w.interaction_tokens[t] = encode_interaction(x.exercise, x.correct, e);
    w.query_tokens[t] = t + 1 < n ? history[first + t + 1].exercise : target;
    w.valid_mask[t] = 1;
  }
  const auto trace = forward(w, ckpt.params, ckpt.config);
  nlohmann::ordered_json j{{"exercise", *config.exercise},
                           {"history_length", history.size()},
                           {"probability", static_cast<double>(trace.probabilities[n - 1])}};
  std::cout << j.dump() << std::endl;
  return 0;
}

int cmd_export_attention(const RunConfig& config) {
  const Checkpoint ckpt = read_checkpoint(config);
  const ParsedLog log = read_log(config, &ckpt.vocabulary);
  const auto users = select_split(config, log.sequences);
  const auto windows = limited(window_all(users, ckpt.config.k, ckpt.config.e), config.limit);
  const fs::path path = output_dir(config) / "attention.csv";
  const auto records = attention_records(ckpt.params, ckpt.config, windows);
  auto out = open_output(path, std::ios::out | std::ios::binary);
  write_attention(out, records);
  finish(out, path);
  nlohmann::ordered_json j{{"windows", windows.size()}, {"records", records.size()}, {"path", path.string()}};
  std::cout << j.dump() << std::endl;
  return 0;
}

}  // namespace dsakt::cli
