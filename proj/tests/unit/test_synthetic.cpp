#include <doctest.h>

#include <algorithm>
#include <random>

#include "dsakt/error.hpp"
#include "dsakt/synthetic.hpp"
#include "oracles.hpp"

using namespace dsakt;

TEST_CASE("degenerate generators") {
  SUBCASE("always mastered, never slips") {
    const auto model = SyntheticSkillModel::uniform(3, 2, {1.0, 0.3, 0.0, 0.2});
    const auto data = generate_synthetic(model, 20, 15, 3);
    for (std::size_t u = 0; u < data.sequences.size(); ++u) {
      for (const auto& x : data.sequences[u].interactions) CHECK(x.correct == 1);
      for (double p : data.oracle_probs[u]) CHECK(p == 1.0);
    }
  }
  SUBCASE("never learns") {
    const auto model = SyntheticSkillModel::uniform(2, 3, {0.0, 0.0, 0.1, 0.2});
    const auto data = generate_synthetic(model, 200, 50, 11);
    std::size_t correct = 0, total = 0;
    for (std::size_t u = 0; u < data.sequences.size(); ++u) {
      for (double p : data.oracle_probs[u]) CHECK(p == doctest::Approx(0.2).epsilon(1e-12));
      for (const auto& x : data.sequences[u].interactions) correct += x.correct, ++total;
    }
    const double rate = static_cast<double>(correct) / static_cast<double>(total);
    CHECK(std::abs(rate - 0.2) < 0.02);  // 10^4 draws, sd 0.004
  }
}

TEST_CASE("first-step prediction") {
  const BktSkill ref{0.4, 0.3, 0.1, 0.2};
  const std::vector<std::uint8_t> one{1};
  CHECK(bkt_predictive(ref, one)[0] == doctest::Approx(0.48).epsilon(1e-15));

  const auto data = generate_synthetic(SyntheticSkillModel::uniform(1, 1, ref), 5, 4, 0);
  for (const auto& p : data.oracle_probs) CHECK(p[0] == doctest::Approx(0.48).epsilon(1e-15));
}

TEST_CASE("Bayes filter agrees with path enumeration") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 0.45);
  for (int trial = 0; trial < 20; ++trial) {
    BktSkill s{u(rng) * 2.0, u(rng) * 2.0, u(rng), u(rng)};
    std::vector<std::uint8_t> responses(10);
    for (auto& r : responses) r = static_cast<std::uint8_t>(rng() & 1u);
    const auto fast = bkt_predictive(s, responses);
    const auto slow = oracle::bkt_predictive_enumerated(s, responses);
    REQUIRE(fast.size() == slow.size());
    for (std::size_t t = 0; t < fast.size(); ++t) CHECK(std::abs(fast[t] - slow[t]) < 1e-12);
  }
}

TEST_CASE("generated datasets") {
  const BktSkill ref{0.4, 0.3, 0.1, 0.2};
  const auto model = SyntheticSkillModel::uniform(10, 2, ref);
  const auto data = generate_synthetic(model, 50, 30, 5);

  SUBCASE("shape and vocabulary") {
    CHECK(data.sequences.size() == 50);
    CHECK(data.vocabulary.size() == 20);
    CHECK(data.vocabulary.id_of(1) == "e1");
    for (std::size_t u = 0; u < 50; ++u) {
      CHECK(data.sequences[u].interactions.size() == 30);
      CHECK(data.oracle_probs[u].size() == 30);
      for (const auto& x : data.sequences[u].interactions) {
        CHECK(x.exercise >= 1);
        CHECK(x.exercise <= 20);
      }
    }
  }
  SUBCASE("oracle bounded by guess and one minus slip") {
    for (const auto& probs : data.oracle_probs)
      for (double p : probs) {
        CHECK(p >= 0.2 - 1e-12);
        CHECK(p <= 0.9 + 1e-12);
      }
  }
  SUBCASE("oracle equals per-skill filtering of the emitted history") {
    for (std::size_t u = 0; u < 5; ++u) {
      const auto& xs = data.sequences[u].interactions;
      std::vector<std::vector<std::uint8_t>> per_skill(10);
      for (std::size_t t = 0; t < xs.size(); ++t) {
        const int skill = model.exercise_skill[static_cast<std::size_t>(xs[t].exercise - 1)];
        auto& hist = per_skill[static_cast<std::size_t>(skill)];
        hist.push_back(xs[t].correct);
        const auto filtered = oracle::bkt_predictive_enumerated(ref, hist);
        CHECK(std::abs(filtered.back() - data.oracle_probs[u][t]) < 1e-12);
      }
    }
  }
  SUBCASE("deterministic per seed") {
    const auto again = generate_synthetic(model, 50, 30, 5);
    const auto other = generate_synthetic(model, 50, 30, 6);
    bool differs = false;
    for (std::size_t u = 0; u < 50; ++u) {
      CHECK(again.oracle_probs[u] == data.oracle_probs[u]);
      for (std::size_t t = 0; t < 30; ++t) {
        CHECK(again.sequences[u].interactions[t].exercise == data.sequences[u].interactions[t].exercise);
        CHECK(again.sequences[u].interactions[t].correct == data.sequences[u].interactions[t].correct);
        differs |= other.sequences[u].interactions[t].exercise != data.sequences[u].interactions[t].exercise;
      }
    }
    CHECK(differs);
  }
  SUBCASE("user prefixes do not depend on the user count") {
    const auto fewer = generate_synthetic(model, 10, 30, 5);
    for (std::size_t u = 0; u < 10; ++u) CHECK(fewer.oracle_probs[u] == data.oracle_probs[u]);
  }
  SUBCASE("records") {
    const auto recs = to_records(data);
    CHECK(recs.size() == 50 * 30);
    CHECK(recs.front().user_id == "u1");
    CHECK(recs[1].timestamp == 1);
    CHECK(recs[30].user_id == "u2");
  }
}

TEST_CASE("skill model validation") {
  CHECK_THROWS_AS(SyntheticSkillModel::uniform(2, 2, {1.2, 0.3, 0.1, 0.2}).validate(), ConfigError);
  CHECK_THROWS_AS(SyntheticSkillModel::uniform(2, 2, {0.4, 0.3, 0.5, 0.5}).validate(), ConfigError);
  CHECK_THROWS_AS(SyntheticSkillModel::uniform(0, 2, {}), ConfigError);
  SyntheticSkillModel orphan = SyntheticSkillModel::uniform(2, 1, {});
  orphan.exercise_skill = {0, 0};
  CHECK_THROWS_AS(orphan.validate(), ConfigError);
  CHECK_NOTHROW(SyntheticSkillModel::uniform(2, 1, {}).validate());
}
