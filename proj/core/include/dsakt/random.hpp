#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace dsakt {

using Rng = std::mt19937_64;

/// Independent generator keyed by a seed and a list of stream ids (user index, epoch, ...).
inline Rng substream(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
  std::vector<std::uint32_t> words{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  for (auto key : keys) {
    words.push_back(static_cast<std::uint32_t>(key));
    words.push_back(static_cast<std::uint32_t>(key >> 32));
  }
  std::seed_seq keyed(words.begin(), words.end());
  return Rng(keyed);
}

inline double uniform01(Rng& rng) { return std::generate_canonical<double, 53>(rng); }

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

}  // namespace dsakt
