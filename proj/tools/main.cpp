#include <charconv>
#include <functional>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "commands.hpp"
#include "dsakt/error.hpp"

namespace {

using dsakt::ConfigError;
using dsakt::cli::RunConfig;

enum class Kind { integer, unsigned_integer, real, text };

struct Field {
  const char* key;
  Kind kind;
  const char* help;
};

constexpr Field kFields[] = {
    {"data", Kind::text, "interaction log (CSV with header)"},
    {"out", Kind::text, "output directory"},
    {"checkpoint", Kind::text, "checkpoint file to read"},
    {"oracle", Kind::text, "oracle probabilities, one per data row (eval)"},
    {"adapter", Kind::text, "log format: canonical, assist-skill, assist-problem"},
    {"seed", Kind::unsigned_integer, "random seed (required)"},
    {"k", Kind::integer, "window length (required for train)"},
    {"d", Kind::integer, "model width"},
    {"h", Kind::integer, "attention heads"},
    {"d_ff", Kind::integer, "feed-forward width, 0 = d"},
    {"n_blocks", Kind::integer, "encoder and decoder blocks"},
    {"dropout", Kind::real, "dropout rate"},
    {"batch_size", Kind::integer, "windows per batch"},
    {"epochs", Kind::integer, "training epochs"},
    {"warmup", Kind::integer, "Noam warmup steps"},
    {"train_ratio", Kind::real, "fraction of users used for training"},
    {"val_fraction", Kind::real, "fraction of training users held out for epoch selection"},
    {"users", Kind::integer, "synthetic users (gen)"},
    {"len", Kind::integer, "interactions per synthetic user (gen)"},
    {"skills", Kind::integer, "synthetic skills (gen)"},
    {"exercises_per_skill", Kind::integer, "exercises per synthetic skill (gen)"},
    {"p_init", Kind::real, "BKT initial mastery (gen)"},
    {"p_learn", Kind::real, "BKT learning rate (gen)"},
    {"p_slip", Kind::real, "BKT slip (gen)"},
    {"p_guess", Kind::real, "BKT guess (gen)"},
    {"history", Kind::text, "id:r,id:r,... (predict)"},
    {"exercise", Kind::text, "next exercise id (predict)"},
    {"split", Kind::text, "users to score: test, train, val, all"},
    {"limit", Kind::integer, "max windows to export, 0 = all"},
};

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ConfigError("--" + key + " expects a number, got '" + text + "'");
  return value;
}

nlohmann::json to_json(const Field& f, const std::string& text) {
  switch (f.kind) {
    case Kind::integer: return parse_number<int>(f.key, text);
    case Kind::unsigned_integer: return parse_number<std::uint64_t>(f.key, text);
    case Kind::real: return parse_number<double>(f.key, text);
    case Kind::text: return text;
  }
  return text;
}

std::string dashed(std::string key) {
  for (auto& c : key)
    if (c == '_') c = '-';
  return key;
}

int exit_code(const std::exception& ex, int code) {
  std::cerr << "dsakt: error: " << ex.what() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DSAKT knowledge tracing: synthesize, train, evaluate, predict, export attention"};
  app.set_help_flag("--help", "print this help and exit");
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  app.add_option("--config", config_path, "JSON file of flat run settings; flags override it");
  std::map<std::string, std::string> raw;
  for (const auto& f : kFields) {
    std::string names = "--" + dashed(f.key);
    if (dashed(f.key) != f.key) names += std::string(",--") + f.key;
    app.add_option(names, raw[f.key], f.help);
  }
  bool full_scale = false;
  app.add_flag("--scale-full-d,--scale_full_d", full_scale, "scale attention by 1/sqrt(d) instead of 1/sqrt(d/h)");

  using Command = std::function<int(const RunConfig&)>;
  const std::pair<const char*, Command> commands[] = {
      {"gen", dsakt::cli::cmd_gen},
      {"train", dsakt::cli::cmd_train},
      {"eval", dsakt::cli::cmd_eval},
      {"predict", dsakt::cli::cmd_predict},
      {"export-attention", dsakt::cli::cmd_export_attention},
  };
  const char* descriptions[] = {"write a synthetic BKT dataset and its oracle probabilities",
                                "train on a log and write the best checkpoint and epoch log",
                                "score a checkpoint on a user split",
                                "probability of a correct answer to the next exercise",
                                "dump attention weights as CSV"};
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < std::size(commands); ++i) subs.push_back(app.add_subcommand(commands[i].first, descriptions[i]));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    app.exit(ex);
    return 2;
  }

  try {
    RunConfig config = config_path.empty() ? RunConfig{} : dsakt::cli::load_config_file(config_path);
    nlohmann::json overrides = nlohmann::json::object();
    for (const auto& f : kFields)
      if (app.count("--" + dashed(f.key)) > 0) overrides[f.key] = to_json(f, raw[f.key]);
    if (full_scale) overrides["scale_full_d"] = true;
    config.merge(overrides);

    for (std::size_t i = 0; i < subs.size(); ++i)
      if (subs[i]->parsed()) return commands[i].second(config);
    return 2;
  } catch (const dsakt::ConfigError& ex) {
    return exit_code(ex, 2);
  } catch (const dsakt::RangeError& ex) {
    return exit_code(ex, 2);
  } catch (const dsakt::ShapeError& ex) {
    return exit_code(ex, 2);
  } catch (const dsakt::NumericError& ex) {
    return exit_code(ex, 3);
  } catch (const dsakt::UndefinedMetricError& ex) {
    return exit_code(ex, 3);
  } catch (const dsakt::EmptyInputError& ex) {
    return exit_code(ex, 3);
  } catch (const dsakt::IoError& ex) {
    return exit_code(ex, 4);
  } catch (const std::filesystem::filesystem_error& ex) {
    return exit_code(ex, 4);
  } catch (const std::exception& ex) {
    return exit_code(ex, 1);
  }
}
