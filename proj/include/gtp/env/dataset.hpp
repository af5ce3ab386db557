#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "gtp/common/batch.hpp"
#include "gtp/common/rng.hpp"
#include "gtp/env/multigoal.hpp"

namespace gtp::env {

struct Transition {
  Vec2 state;
  Vec2 action;
  double reward;
  Vec2 next_state;
  bool terminal;

  friend bool operator==(const Transition&, const Transition&) = default;
};

/// Per-dimension state statistics; std is floored at 1e-6.
struct Normalization {
  Vec2 mean{0.0, 0.0};
  Vec2 std{1.0, 1.0};

  Vec2 normalize(const Vec2& s) const;
  Vec2 denormalize(const Vec2& s) const;

  friend bool operator==(const Normalization&, const Normalization&) = default;
};

Normalization compute_normalization(const std::vector<Transition>& transitions);

struct OfflineDataset {
  std::vector<Transition> transitions;
  MultiGoalEnvSpec env;
  std::uint64_t seed = 0;
  double behavior_noise = 0.0;
  std::vector<std::size_t> episodes_per_goal;
  Normalization norm;

  std::size_t size() const { return transitions.size(); }

  friend bool operator==(const OfflineDataset&, const OfflineDataset&) = default;
};

/// Scripted data: episode e heads for goal e mod n_goals with action
/// clamp(unit direction + noise N(0, I)), until a goal is reached or the horizon ends.
OfflineDataset gen_dataset(const MultiGoalEnvSpec& spec, std::size_t n_episodes, double behavior_noise,
                           std::uint64_t seed);

/// Uniform with replacement; states and next_states normalized.
Batch sample_batch(const OfflineDataset& data, std::size_t batch_size, Rng& rng);

// Text format, one "key = value" line per header field, then
//   transitions = N
// followed by N lines "sx,sy,ax,ay,r,nsx,nsy,terminal" (terminal is 0 or 1).
// Reals are written in shortest round-trip form.
void write_dataset(std::ostream& os, const OfflineDataset& data);
void write_dataset(const std::filesystem::path& path, const OfflineDataset& data);
/// Throws ParseError naming the line (or record index for invalid transitions).
OfflineDataset read_dataset(std::istream& is);
OfflineDataset read_dataset(const std::filesystem::path& path);

}  // namespace gtp::env
