#include <doctest.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "dsakt/datastore.hpp"
#include "dsakt/error.hpp"

using namespace dsakt;

namespace {

UserSequence make_user(const std::string& id, std::vector<Interaction> xs) {
  UserSequence s;
  s.user_id = id;
  s.interactions = std::move(xs);
  for (std::size_t i = 0; i < s.interactions.size(); ++i) s.source_rows.push_back(i);
  return s;
}

UserSequence ramp(int length, int e) {
  std::vector<Interaction> xs;
  for (int i = 0; i < length; ++i) xs.push_back({1 + i % e, static_cast<std::uint8_t>(i % 3 == 0)});
  return make_user("ramp", xs);
}

ParsedLog parse(const std::string& text, const LogFormat& format = LogFormat::canonical()) {
  std::istringstream in(text);
  return parse_interaction_log(in, format);
}

}  // namespace

TEST_CASE("interaction encoding") {
  CHECK(encode_interaction(5, 1, 188) == 193);
  CHECK(encode_interaction(5, 0, 188) == 5);

  std::set<int> tokens;
  for (int ex = 1; ex <= 4; ++ex)
    for (int r = 0; r <= 1; ++r) tokens.insert(encode_interaction(ex, r, 4));
  CHECK(tokens == std::set<int>{1, 2, 3, 4, 5, 6, 7, 8});

  for (int e : {1, 3, 17, 188})
    for (int ex = 1; ex <= e; ++ex)
      for (int r = 0; r <= 1; ++r) {
        const auto back = decode_interaction(encode_interaction(ex, r, e), e);
        CHECK(back.exercise == ex);
        CHECK(back.correct == r);
      }

  CHECK_THROWS_AS(encode_interaction(0, 1, 4), RangeError);
  CHECK_THROWS_AS(encode_interaction(5, 0, 4), RangeError);
  CHECK_THROWS_AS(encode_interaction(1, 2, 4), RangeError);
  CHECK_THROWS_AS(decode_interaction(0, 4), RangeError);
  CHECK_THROWS_AS(decode_interaction(9, 4), RangeError);
}

TEST_CASE("windowing") {
  SUBCASE("three interactions, k = 2") {
    const auto seq = make_user("a", {{1, 0}, {2, 1}, {3, 1}});
    const auto ws = window_user(seq, 2, 3);
    REQUIRE(ws.size() == 1);
    CHECK(ws[0].interaction_tokens == std::vector<int>{1, 5});
    CHECK(ws[0].query_tokens == std::vector<int>{2, 3});
    CHECK(ws[0].targets == std::vector<std::uint8_t>{1, 1});
    CHECK(ws[0].valid_mask == std::vector<std::uint8_t>{1, 1});
  }
  SUBCASE("two interactions pad the tail") {
    const auto ws = window_user(make_user("b", {{2, 1}, {1, 0}}), 2, 2);
    REQUIRE(ws.size() == 1);
    CHECK(ws[0].valid_mask == std::vector<std::uint8_t>{1, 0});
    CHECK(ws[0].interaction_tokens == std::vector<int>{4, 0});
    CHECK(ws[0].query_tokens == std::vector<int>{1, 0});
    CHECK(ws[0].targets == std::vector<std::uint8_t>{0, 0});
    CHECK(ws[0].valid_count() == 1);
  }
  SUBCASE("length 101 with k = 50") {
    const int e = 7;
    const auto seq = ramp(101, e);
    const auto ws = window_user(seq, 50, e);
    REQUIRE(ws.size() == 2);
    CHECK(ws[1].valid_count() == 50);
    // second window: inputs are interactions 51..100, targets 52..101 (1-based)
    CHECK(decode_interaction(ws[1].interaction_tokens[0], e).exercise == seq.interactions[50].exercise);
    CHECK(ws[1].query_tokens[49] == seq.interactions[100].exercise);
    CHECK(ws[1].targets[49] == seq.interactions[100].correct);
  }
  SUBCASE("window counts") {
    CHECK(window_user(ramp(51, 3), 50, 3).size() == 1);
    CHECK(window_user(ramp(52, 3), 50, 3).size() == 2);
    CHECK(window_user(ramp(21, 3), 20, 3).size() == 1);
    CHECK(window_user(ramp(102, 3), 50, 3)[2].valid_count() == 1);
  }
  SUBCASE("alignment and padding invariants") {
    for (int length : {2, 5, 13, 40}) {
      for (int k : {1, 3, 8}) {
        const int e = 5;
        const auto seq = ramp(length, e);
        const auto ws = window_user(seq, k, e);
        std::size_t seen = 0;
        for (std::size_t w = 0; w < ws.size(); ++w) {
          for (int t = 0; t < k; ++t) {
            const auto ut = static_cast<std::size_t>(t);
            const bool valid = ws[w].valid_mask[ut] == 1;
            CHECK(valid == (ws[w].interaction_tokens[ut] != 0));
            CHECK(valid == (ws[w].query_tokens[ut] != 0));
            if (!valid) continue;
            const std::size_t i = w * static_cast<std::size_t>(k) + ut;
            const auto cur = decode_interaction(ws[w].interaction_tokens[ut], e);
            CHECK(cur.exercise == seq.interactions[i].exercise);
            CHECK(cur.correct == seq.interactions[i].correct);
            CHECK(ws[w].query_tokens[ut] == seq.interactions[i + 1].exercise);
            CHECK(ws[w].targets[ut] == seq.interactions[i + 1].correct);
            ++seen;
          }
        }
        CHECK(seen == static_cast<std::size_t>(length - 1));
      }
    }
  }
  SUBCASE("window values follow the same layout") {
    const std::vector<double> v{0.1, 0.2, 0.3, 0.4, 0.5};
    const auto rows = window_values(v, 3);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == std::vector<double>{0.2, 0.3, 0.4});
    CHECK(rows[1] == std::vector<double>{0.5, 0.0, 0.0});
  }
  CHECK_THROWS_AS(window_user(make_user("c", {{1, 0}}), 2, 2), ConfigError);
  CHECK_THROWS_AS(window_user(ramp(4, 2), 0, 2), ConfigError);
}

TEST_CASE("parsing canonical logs") {
  SUBCASE("one user, three rows") {
    const auto log = parse("user_id,exercise_id,correct,timestamp\nu,q7,0,1\nu,q9,1,2\nu,q7,1,3\n");
    REQUIRE(log.sequences.size() == 1);
    CHECK(log.sequences[0].interactions.size() == 3);
    CHECK(log.vocabulary.size() == 2);
    CHECK(log.sequences[0].interactions[1].correct == 1);
    CHECK(log.sequences[0].interactions[2].exercise == log.vocabulary.index_of("q7"));
  }
  SUBCASE("single-row users are dropped and counted") {
    const auto log = parse("user_id,exercise_id,correct,timestamp\na,x,1,5\nb,y,0,1\nb,x,1,2\n");
    CHECK(log.sequences.size() == 1);
    CHECK(log.skipped_users == 1);
    CHECK(log.sequences[0].user_id == "b");
  }
  SUBCASE("timestamps sort stably") {
    const auto log = parse("user_id,exercise_id,correct,timestamp\nu,c,0,30\nu,a,0,10\nu,b,1,10\nu,d,1,20\n");
    const auto& xs = log.sequences[0].interactions;
    const auto& v = log.vocabulary;
    CHECK(xs[0].exercise == v.index_of("a"));
    CHECK(xs[1].exercise == v.index_of("b"));
    CHECK(xs[2].exercise == v.index_of("d"));
    CHECK(xs[3].exercise == v.index_of("c"));
    CHECK(log.sequences[0].source_rows == std::vector<std::size_t>{1, 2, 3, 0});
  }
  SUBCASE("column order, missing timestamp and CRLF") {
    const auto log = parse("correct,user_id,exercise_id\r\n1,u,x\r\n0,u,y\r\n");
    REQUIRE(log.sequences.size() == 1);
    CHECK(log.sequences[0].interactions[0].correct == 1);
    CHECK(log.vocabulary.id_of(1) == "x");
  }
  SUBCASE("quoted fields") {
    CHECK(split_delimited("a,\"b,c\",d", ',') == std::vector<std::string>{"a", "b,c", "d"});
    CHECK(split_delimited("\"say \"\"hi\"\"\",", ',') == std::vector<std::string>{"say \"hi\"", ""});
  }
  SUBCASE("errors carry line numbers") {
    try {
      parse("user_id,exercise_id,correct\nu,x,1\nu,y,2\n");
      FAIL("expected FormatError");
    } catch (const FormatError& ex) {
      CHECK(ex.line() == 3);
      CHECK(std::string(ex.what()).find("line 3") != std::string::npos);
    }
    try {
      parse("user_id,exercise_id,correct\nu,x,1\nu,y\n");
      FAIL("expected FormatError");
    } catch (const FormatError& ex) {
      CHECK(ex.line() == 3);
    }
    CHECK_THROWS_AS(parse("user_id,exercise_id\nu,x\n"), FormatError);
    CHECK_THROWS_AS(parse("user_id,exercise_id,correct,timestamp\nu,x,1,soon\n"), FormatError);
    CHECK_THROWS_AS(parse("user_id,exercise_id,correct\nu,,1\n"), FormatError);
  }
  SUBCASE("empty input") {
    CHECK_THROWS_AS(parse(""), FormatError);
    CHECK_THROWS_AS(parse("user_id,exercise_id,correct\n"), FormatError);
  }
  SUBCASE("fixed vocabulary") {
    const Vocabulary v({"x", "y"});
    std::istringstream ok("user_id,exercise_id,correct\nu,y,1\nu,x,0\n");
    const auto log = parse_interaction_log(ok, LogFormat::canonical(), v);
    CHECK(log.vocabulary == v);
    CHECK(log.sequences[0].interactions[0].exercise == 2);
    std::istringstream bad("user_id,exercise_id,correct\nu,y,1\nu,z,0\n");
    CHECK_THROWS_AS(parse_interaction_log(bad, LogFormat::canonical(), v), FormatError);
  }
  SUBCASE("write then parse") {
    const std::vector<InteractionRecord> recs{{"u1", "e1", 1, 0}, {"u1", "e2", 0, 1}, {"u2", "e2", 1, 0},
                                              {"u2", "e1", 1, 1}};
    std::ostringstream out;
    write_interaction_log(out, recs);
    const auto log = parse(out.str());
    CHECK(log.rows == 4);
    CHECK(log.sequences.size() == 2);
  }
}

TEST_CASE("vocabulary") {
  Vocabulary v;
  CHECK(v.intern("a") == 1);
  CHECK(v.intern("b") == 2);
  CHECK(v.intern("a") == 1);
  CHECK(v.id_of(2) == "b");
  CHECK_THROWS_AS(v.index_of("zz"), RangeError);
  CHECK_THROWS_AS(v.id_of(0), RangeError);
  CHECK_THROWS_AS(Vocabulary({"a", "a"}), ConfigError);
}

TEST_CASE("ASSIST-style export") {
  std::ifstream in(std::string(DSAKT_TEST_DATA_DIR) + "/assist09_sample.csv");
  REQUIRE(in.good());
  SUBCASE("skill column") {
    const auto log = parse_interaction_log(in, LogFormat::by_name("assist-skill"));
    CHECK(log.vocabulary.size() == 5);  // distinct non-null skill_id values in the fixture
    CHECK(log.rows == 55);
    CHECK(log.skipped_rows == 13);
    CHECK(log.sequences.size() == 11);
    CHECK(log.skipped_users == 1);
    for (const auto& s : log.sequences)
      for (std::size_t i = 1; i < s.source_rows.size(); ++i) CHECK(s.source_rows[i] != s.source_rows[i - 1]);
  }
  SUBCASE("problem column") {
    const auto log = parse_interaction_log(in, LogFormat::by_name("assist-problem"));
    CHECK(log.vocabulary.size() == 35);
    CHECK(log.rows == 68);
    CHECK(log.skipped_users == 1);
  }
  CHECK_THROWS_AS(LogFormat::by_name("pintia"), ConfigError);
}

TEST_CASE("user split") {
  std::vector<UserSequence> users;
  for (int u = 0; u < 10; ++u) users.push_back(make_user("u" + std::to_string(u), {{1, 0}, {1, 1}}));

  const auto [train, test] = split_dataset(users, 0.8, 42);
  CHECK(train.size() == 8);
  CHECK(test.size() == 2);
  std::set<std::string> ids;
  for (const auto& s : train) ids.insert(s.user_id);
  for (const auto& s : test) ids.insert(s.user_id);
  CHECK(ids.size() == 10);

  const auto [train2, test2] = split_dataset(users, 0.8, 42);
  for (std::size_t i = 0; i < train.size(); ++i) CHECK(train[i].user_id == train2[i].user_id);
  for (std::size_t i = 0; i < test.size(); ++i) CHECK(test[i].user_id == test2[i].user_id);

  std::vector<UserSequence> many(5816, make_user("x", {{1, 0}, {1, 1}}));
  CHECK(split_dataset(many, 0.8, 1).first.size() == 4653);
  CHECK(std::lround(0.8 * 5816) == 4653);

  CHECK_THROWS_AS(split_dataset(std::span(users).first(1), 0.8, 1), ConfigError);
  CHECK_THROWS_AS(split_dataset(users, 1.0, 1), ConfigError);
  CHECK_THROWS_AS(split_dataset(users, 0.0, 1), ConfigError);
}
