#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace dsakt {

/// One raw log row.
struct InteractionRecord {
  std::string user_id;
  std::string exercise_id;
  std::uint8_t correct = 0;
  std::int64_t timestamp = 0;
};

struct Interaction {
  int exercise = 0;  // 1-based vocabulary index
  std::uint8_t correct = 0;
};

/// One student's history, oldest first.
struct UserSequence {
  std::string user_id;
  std::vector<Interaction> interactions;
  // 0-based data-row index of each interaction in the source log, for aligning sidecar files.
  std::vector<std::size_t> source_rows;
};

/// Bijection between opaque exercise ids and indices 1..e. Index 0 is padding.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> ids);

  /// Returns the existing index or assigns the next one.
  int intern(const std::string& id);
  int index_of(const std::string& id) const;  // throws RangeError when unknown
  bool contains(const std::string& id) const { return forward_.contains(id); }
  const std::string& id_of(int index) const;
  int size() const { return static_cast<int>(ids_.size()); }
  const std::vector<std::string>& ids() const { return ids_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.ids_ == b.ids_; }

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, int> forward_;
};

/// Fixed-length training sample. Positions are right-padded with zeros.
struct EncodedWindow {
  std::vector<int> interaction_tokens;  // [k], in [0, 2e]
  std::vector<int> query_tokens;        // [k], in [0, e]
  std::vector<std::uint8_t> targets;    // [k]
  std::vector<std::uint8_t> valid_mask; // [k]

  int length() const { return static_cast<int>(interaction_tokens.size()); }
  int valid_count() const;
};

/// Column mapping for delimiter-separated logs.
struct LogFormat {
  std::string user_column = "user_id";
  std::string exercise_column = "exercise_id";
  std::string correct_column = "correct";
  std::string timestamp_column = "timestamp";  // optional in the file
  char delimiter = ',';
  bool skip_empty_exercise = false;

  static LogFormat canonical() { return {}; }
  /// ASSISTments export; `exercise_column` is "skill_id" or "problem_id". Rows without a skill are skipped.
  static LogFormat assist(const std::string& exercise_column = "skill_id");
  /// "canonical", "assist-skill" or "assist-problem".
  static LogFormat by_name(const std::string& name);
};

struct ParsedLog {
  std::vector<UserSequence> sequences;  // users in order of first appearance
  Vocabulary vocabulary;
  std::size_t rows = 0;           // data rows accepted
  std::size_t skipped_users = 0;  // users with fewer than two interactions
  std::size_t skipped_rows = 0;   // rows dropped by the format (e.g. empty skill id)
};

ParsedLog parse_interaction_log(std::istream& in, const LogFormat& format = LogFormat::canonical());

/// Same, but exercise ids must already be in `vocabulary`; unknown ids are a FormatError.
ParsedLog parse_interaction_log(std::istream& in, const LogFormat& format, const Vocabulary& vocabulary);

/// Writes the canonical header `user_id,exercise_id,correct,timestamp` and one row per record.
void write_interaction_log(std::ostream& out, std::span<const InteractionRecord> records);

/// Splits one delimited line, honouring double-quoted fields.
std::vector<std::string> split_delimited(const std::string& line, char delimiter);

/// token = correct * e + exercise, so tokens occupy [1, 2e].
int encode_interaction(int exercise, int correct, int e);
Interaction decode_interaction(int token, int e);

/// Consecutive windows over a user. Window w takes inputs w*k .. w*k+k-1 (0-based) and
/// targets one step ahead; the last window is right-padded.
std::vector<EncodedWindow> window_user(const UserSequence& seq, int k, int e);
std::vector<EncodedWindow> window_all(std::span<const UserSequence> sequences, int k, int e);

/// Per-interaction values (e.g. oracle probabilities) laid out like window targets. Padded slots hold 0.
std::vector<std::vector<double>> window_values(std::span<const double> per_interaction, int k);

/// User-granular split. |train| = round(ratio * users); each side keeps the input order.
std::pair<std::vector<UserSequence>, std::vector<UserSequence>> split_dataset(
    std::span<const UserSequence> sequences, double ratio, std::uint64_t seed);

}  // namespace dsakt
