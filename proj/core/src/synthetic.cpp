#include "dsakt/synthetic.hpp"

#include <string>

#include "dsakt/error.hpp"
#include "dsakt/random.hpp"

namespace dsakt {

SyntheticSkillModel SyntheticSkillModel::uniform(int n_skills, int exercises_per_skill, const BktSkill& params) {
  if (n_skills < 1 || exercises_per_skill < 1) throw ConfigError("skill and exercise counts must be positive");
  SyntheticSkillModel model;
  model.skills.assign(static_cast<std::size_t>(n_skills), params);
  for (int s = 0; s < n_skills; ++s)
    for (int j = 0; j < exercises_per_skill; ++j) model.exercise_skill.push_back(s);
  return model;
}

void SyntheticSkillModel::validate() const {
  if (skills.empty()) throw ConfigError("synthetic model has no skills");
  auto in_unit = [](double p) { return p >= 0.0 && p <= 1.0; };
  for (std::size_t s = 0; s < skills.size(); ++s) {
    const auto& k = skills[s];
    if (!in_unit(k.p_init) || !in_unit(k.p_learn) || !in_unit(k.p_slip) || !in_unit(k.p_guess))
      throw ConfigError("skill " + std::to_string(s) + ": probabilities must lie in [0, 1]");
    if (!(k.p_guess < 1.0 - k.p_slip))
      throw ConfigError("skill " + std::to_string(s) + ": need p_guess < 1 - p_slip");
  }
  std::vector<int> owned(skills.size(), 0);
  for (int s : exercise_skill) {
    if (s < 0 || static_cast<std::size_t>(s) >= skills.size()) throw ConfigError("exercise mapped to unknown skill");
    ++owned[static_cast<std::size_t>(s)];
  }
  for (std::size_t s = 0; s < owned.size(); ++s)
    if (owned[s] == 0) throw ConfigError("skill " + std::to_string(s) + " owns no exercise");
}

namespace {

// Belief that the skill is mastered, before and after one observation.
struct Belief {
  double mastered;

  double predictive(const BktSkill& k) const { return mastered * (1.0 - k.p_slip) + (1.0 - mastered) * k.p_guess; }

  void observe(const BktSkill& k, bool correct) {
    const double like_m = correct ? 1.0 - k.p_slip : k.p_slip;
    const double like_u = correct ? k.p_guess : 1.0 - k.p_guess;
    const double num = mastered * like_m;
    const double den = num + (1.0 - mastered) * like_u;
    const double posterior = den > 0.0 ? num / den : mastered;
    mastered = posterior + (1.0 - posterior) * k.p_learn;
  }
};

}  // namespace

std::vector<double> bkt_predictive(const BktSkill& skill, std::span<const std::uint8_t> responses) {
  std::vector<double> out;
  out.reserve(responses.size());
  Belief belief{skill.p_init};
  for (auto r : responses) {
    out.push_back(belief.predictive(skill));
    belief.observe(skill, r != 0);
  }
  return out;
}

SyntheticDataset generate_synthetic(const SyntheticSkillModel& model, int n_users, int seq_len, std::uint64_t seed) {
  model.validate();
  if (n_users < 1 || seq_len < 1) throw ConfigError("user count and sequence length must be positive");

  const std::size_t n_skills = model.skills.size();
  std::vector<std::vector<int>> skill_exercises(n_skills);
  for (std::size_t i = 0; i < model.exercise_skill.size(); ++i)
    skill_exercises[static_cast<std::size_t>(model.exercise_skill[i])].push_back(static_cast<int>(i) + 1);

  SyntheticDataset data;
  for (int i = 1; i <= model.exercise_count(); ++i) data.vocabulary.intern("e" + std::to_string(i));

  std::size_t row = 0;
  for (int u = 0; u < n_users; ++u) {
    Rng rng = substream(seed, {static_cast<std::uint64_t>(u)});
    std::vector<char> mastered(n_skills);
    for (std::size_t s = 0; s < n_skills; ++s) mastered[s] = bernoulli(rng, model.skills[s].p_init);
    std::vector<Belief> belief(n_skills);
    for (std::size_t s = 0; s < n_skills; ++s) belief[s].mastered = model.skills[s].p_init;

    UserSequence seq;
    seq.user_id = "u" + std::to_string(u + 1);
    std::vector<double> oracle;
    for (int t = 0; t < seq_len; ++t) {
      const auto skill = static_cast<std::size_t>(rng() % n_skills);
      const auto& options = skill_exercises[skill];
      const int exercise = options[static_cast<std::size_t>(rng() % options.size())];
      const BktSkill& p = model.skills[skill];

      const bool correct = bernoulli(rng, mastered[skill] ? 1.0 - p.p_slip : p.p_guess);
      if (!mastered[skill]) mastered[skill] = bernoulli(rng, p.p_learn);

      oracle.push_back(belief[skill].predictive(p));
      belief[skill].observe(p, correct);
      seq.interactions.push_back({exercise, static_cast<std::uint8_t>(correct)});
      seq.source_rows.push_back(row++);
    }
    data.sequences.push_back(std::move(seq));
    data.oracle_probs.push_back(std::move(oracle));
  }
  return data;
}

std::vector<InteractionRecord> to_records(const SyntheticDataset& data) {
  std::vector<InteractionRecord> records;
  for (const auto& seq : data.sequences) {
    std::int64_t t = 0;
    for (const auto& it : seq.interactions)
      records.push_back({seq.user_id, data.vocabulary.id_of(it.exercise), it.correct, t++});
  }
  return records;
}

}  // namespace dsakt
