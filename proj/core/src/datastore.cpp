#include "dsakt/datastore.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>

#include "dsakt/error.hpp"
#include "dsakt/random.hpp"

namespace dsakt {

Vocabulary::Vocabulary(std::vector<std::string> ids) {
  for (const auto& id : ids) {
    if (forward_.contains(id)) throw ConfigError("duplicate exercise id in vocabulary: " + id);
    intern(id);
  }
}

int Vocabulary::intern(const std::string& id) {
  auto [it, inserted] = forward_.try_emplace(id, static_cast<int>(ids_.size()) + 1);
  if (inserted) ids_.push_back(id);
  return it->second;
}

int Vocabulary::index_of(const std::string& id) const {
  auto it = forward_.find(id);
  if (it == forward_.end()) throw RangeError("unknown exercise id: " + id);
  return it->second;
}

const std::string& Vocabulary::id_of(int index) const {
  if (index < 1 || index > size()) throw RangeError("exercise index out of range: " + std::to_string(index));
  return ids_[static_cast<std::size_t>(index - 1)];
}

int EncodedWindow::valid_count() const {
  return static_cast<int>(std::count(valid_mask.begin(), valid_mask.end(), std::uint8_t{1}));
}

LogFormat LogFormat::assist(const std::string& exercise_column) {
  LogFormat f;
  f.user_column = "user_id";
  f.exercise_column = exercise_column;
  f.correct_column = "correct";
  f.timestamp_column = "order_id";
  f.skip_empty_exercise = true;
  return f;
}

LogFormat LogFormat::by_name(const std::string& name) {
  if (name == "canonical") return canonical();
  if (name == "assist-skill") return assist("skill_id");
  if (name == "assist-problem") return assist("problem_id");
  throw ConfigError("unknown dataset adapter '" + name + "' (expected canonical, assist-skill, assist-problem)");
}

std::vector<std::string> split_delimited(const std::string& line, char delimiter) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delimiter) {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

namespace {

struct Columns {
  std::size_t user, exercise, correct;
  std::optional<std::size_t> timestamp;
  std::size_t count;
};

Columns locate_columns(const std::vector<std::string>& header, const LogFormat& format) {
  auto find = [&](const std::string& name) -> std::optional<std::size_t> {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  auto require = [&](const std::string& name) {
    auto idx = find(name);
    if (!idx) throw FormatError("header is missing required column '" + name + "'", 1);
    return *idx;
  };
  return Columns{require(format.user_column), require(format.exercise_column), require(format.correct_column),
                 find(format.timestamp_column), header.size()};
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

struct Row {
  InteractionRecord record;
  std::size_t data_row;
  std::size_t line;
};

ParsedLog parse_impl(std::istream& in, const LogFormat& format, const Vocabulary* fixed) {
  std::string line;
  std::size_t line_no = 0;
  // header, skipping a UTF-8 BOM
  if (!std::getline(in, line)) throw FormatError("empty input");
  ++line_no;
  strip_cr(line);
  if (line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
  if (line.empty()) throw FormatError("empty input");
  const Columns cols = locate_columns(split_delimited(line, format.delimiter), format);

  ParsedLog parsed;
  std::vector<Row> rows;
  std::size_t data_row = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    auto fields = split_delimited(line, format.delimiter);
    if (fields.size() != cols.count)
      throw FormatError("expected " + std::to_string(cols.count) + " columns, found " + std::to_string(fields.size()),
                        line_no);
    const std::size_t this_row = data_row++;
    const std::string& correct = fields[cols.correct];
    if (correct != "0" && correct != "1")
      throw FormatError("column '" + format.correct_column + "' must be 0 or 1, found '" + correct + "'", line_no);
    if (fields[cols.user].empty()) throw FormatError("empty user id", line_no);
    if (fields[cols.exercise].empty()) {
      if (format.skip_empty_exercise) {
        ++parsed.skipped_rows;
        continue;
      }
      throw FormatError("empty exercise id", line_no);
    }
    Row row{{fields[cols.user], fields[cols.exercise], static_cast<std::uint8_t>(correct == "1"), 0}, this_row,
            line_no};
    if (cols.timestamp) {
      const std::string& ts = fields[*cols.timestamp];
      auto [ptr, ec] = std::from_chars(ts.data(), ts.data() + ts.size(), row.record.timestamp);
      if (ec != std::errc() || ptr != ts.data() + ts.size())
        throw FormatError("column '" + format.timestamp_column + "' is not an integer: '" + ts + "'", line_no);
    } else {
      row.record.timestamp = static_cast<std::int64_t>(this_row);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw FormatError("empty input: no data rows");
  parsed.rows = rows.size();

  if (fixed) {
    parsed.vocabulary = *fixed;
    for (const auto& r : rows)
      if (!fixed->contains(r.record.exercise_id))
        throw FormatError("exercise id '" + r.record.exercise_id + "' is not in the vocabulary", r.line);
  } else {
    for (const auto& r : rows) parsed.vocabulary.intern(r.record.exercise_id);
  }

  // Group by user in order of first appearance.
  std::unordered_map<std::string, std::size_t> user_slot;
  std::vector<std::vector<const Row*>> grouped;
  for (const auto& r : rows) {
    auto [it, inserted] = user_slot.try_emplace(r.record.user_id, grouped.size());
    if (inserted) grouped.emplace_back();
    grouped[it->second].push_back(&r);
  }
  for (auto& group : grouped) {
    if (group.size() < 2) {
      ++parsed.skipped_users;
      continue;
    }
    std::stable_sort(group.begin(), group.end(),
                     [](const Row* a, const Row* b) { return a->record.timestamp < b->record.timestamp; });
    UserSequence seq;
    seq.user_id = group.front()->record.user_id;
    seq.interactions.reserve(group.size());
    seq.source_rows.reserve(group.size());
    for (const Row* r : group) {
      seq.interactions.push_back({parsed.vocabulary.index_of(r->record.exercise_id), r->record.correct});
      seq.source_rows.push_back(r->data_row);
    }
    parsed.sequences.push_back(std::move(seq));
  }
  return parsed;
}

}  // namespace

ParsedLog parse_interaction_log(std::istream& in, const LogFormat& format) { return parse_impl(in, format, nullptr); }

ParsedLog parse_interaction_log(std::istream& in, const LogFormat& format, const Vocabulary& vocabulary) {
  return parse_impl(in, format, &vocabulary);
}

void write_interaction_log(std::ostream& out, std::span<const InteractionRecord> records) {
  out << "user_id,exercise_id,correct,timestamp\n";
  for (const auto& r : records)
    out << r.user_id << ',' << r.exercise_id << ',' << static_cast<int>(r.correct) << ',' << r.timestamp << '\n';
}

int encode_interaction(int exercise, int correct, int e) {
  if (e < 1) throw RangeError("vocabulary size must be positive");
  if (exercise < 1 || exercise > e)
    throw RangeError("exercise index " + std::to_string(exercise) + " outside [1, " + std::to_string(e) + "]");
  if (correct != 0 && correct != 1) throw RangeError("correct must be 0 or 1");
  return correct * e + exercise;
}

Interaction decode_interaction(int token, int e) {
  if (token < 1 || token > 2 * e)
    throw RangeError("interaction token " + std::to_string(token) + " outside [1, " + std::to_string(2 * e) + "]");
  const int correct = (token - 1) / e;
  return {token - correct * e, static_cast<std::uint8_t>(correct)};
}

std::vector<EncodedWindow> window_user(const UserSequence& seq, int k, int e) {
  if (k < 1) throw ConfigError("window length k must be >= 1");
  const int n = static_cast<int>(seq.interactions.size());
  if (n < 2) throw ConfigError("user '" + seq.user_id + "' has fewer than 2 interactions");
  const int pairs = n - 1;
  const int count = (pairs + k - 1) / k;
  std::vector<EncodedWindow> windows;
  windows.reserve(static_cast<std::size_t>(count));
  for (int w = 0; w < count; ++w) {
    EncodedWindow win;
    const auto uk = static_cast<std::size_t>(k);
    win.interaction_tokens.assign(uk, 0);
    win.query_tokens.assign(uk, 0);
    win.targets.assign(uk, 0);
    win.valid_mask.assign(uk, 0);
    for (int t = 0; t < k; ++t) {
      const int i = w * k + t;
      if (i >= pairs) break;
      const auto& cur = seq.interactions[static_cast<std::size_t>(i)];
      const auto& next = seq.interactions[static_cast<std::size_t>(i + 1)];
      const auto ut = static_cast<std::size_t>(t);
      win.interaction_tokens[ut] = encode_interaction(cur.exercise, cur.correct, e);
      if (next.exercise < 1 || next.exercise > e) throw RangeError("exercise index outside vocabulary");
      win.query_tokens[ut] = next.exercise;
      win.targets[ut] = next.correct;
      win.valid_mask[ut] = 1;
    }
    windows.push_back(std::move(win));
  }
  return windows;
}

std::vector<EncodedWindow> window_all(std::span<const UserSequence> sequences, int k, int e) {
  std::vector<EncodedWindow> out;
  for (const auto& s : sequences) {
    auto w = window_user(s, k, e);
    out.insert(out.end(), std::make_move_iterator(w.begin()), std::make_move_iterator(w.end()));
  }
  return out;
}

std::vector<std::vector<double>> window_values(std::span<const double> per_interaction, int k) {
  if (k < 1) throw ConfigError("window length k must be >= 1");
  const int pairs = static_cast<int>(per_interaction.size()) - 1;
  std::vector<std::vector<double>> out;
  for (int start = 0; start < pairs; start += k) {
    std::vector<double> row(static_cast<std::size_t>(k), 0.0);
    for (int t = 0; t < k && start + t < pairs; ++t)
      row[static_cast<std::size_t>(t)] = per_interaction[static_cast<std::size_t>(start + t + 1)];
    out.push_back(std::move(row));
  }
  return out;
}

std::pair<std::vector<UserSequence>, std::vector<UserSequence>> split_dataset(std::span<const UserSequence> sequences,
                                                                              double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw ConfigError("split ratio must lie in (0, 1)");
  const std::size_t n = sequences.size();
  if (n < 2) throw ConfigError("need at least 2 users to split, have " + std::to_string(n));
  const auto n_train = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
  if (n_train == 0 || n_train == n)
    throw ConfigError("split ratio " + std::to_string(ratio) + " leaves one side empty for " + std::to_string(n) +
                      " users");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = substream(seed, {0x5u});
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<char> in_train(n, 0);
  for (std::size_t i = 0; i < n_train; ++i) in_train[order[i]] = 1;

  std::pair<std::vector<UserSequence>, std::vector<UserSequence>> out;
  out.first.reserve(n_train);
  out.second.reserve(n - n_train);
  for (std::size_t i = 0; i < n; ++i) (in_train[i] ? out.first : out.second).push_back(sequences[i]);
  return out;
}

}  // namespace dsakt
