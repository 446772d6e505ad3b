#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dsakt/datastore.hpp"

namespace dsakt {

/// Two-state BKT parameters for one skill.
struct BktSkill {
  double p_init = 0.4;
  double p_learn = 0.3;
  double p_slip = 0.1;
  double p_guess = 0.2;
};

/// Synthetic students: each exercise belongs to exactly one skill.
struct SyntheticSkillModel {
  std::vector<BktSkill> skills;
  std::vector<int> exercise_skill;  // exercise_skill[i] = skill of exercise i+1

  /// `n_skills` skills sharing `params`, exercises 1..n_skills*per_skill grouped skill by skill.
  static SyntheticSkillModel uniform(int n_skills, int exercises_per_skill, const BktSkill& params);

  int exercise_count() const { return static_cast<int>(exercise_skill.size()); }
  /// Throws ConfigError unless every probability is in [0,1], p_guess < 1 - p_slip and
  /// every skill owns at least one exercise.
  void validate() const;
};

struct SyntheticDataset {
  std::vector<UserSequence> sequences;
  std::vector<std::vector<double>> oracle_probs;  // per user, per interaction
  Vocabulary vocabulary;                          // "e1".."eN"
};

/// Per step: pick a skill uniformly, then one of its exercises uniformly; respond with p_guess when
/// unmastered and 1 - p_slip when mastered; an unmastered skill is then learned with p_learn.
/// oracle_probs are the exact Bayes-filter predictive probabilities given the emitted history.
/// Each user draws from its own substream of `seed`.
SyntheticDataset generate_synthetic(const SyntheticSkillModel& model, int n_users, int seq_len, std::uint64_t seed);

/// Forward recursion of the two-state HMM for one skill: P(correct at each step | earlier responses).
std::vector<double> bkt_predictive(const BktSkill& skill, std::span<const std::uint8_t> responses);

/// Flattens a dataset to canonical records: users "u1".., one timestamp per step.
std::vector<InteractionRecord> to_records(const SyntheticDataset& data);

}  // namespace dsakt
