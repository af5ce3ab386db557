#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "gtp/common/rng.hpp"

namespace gtp::env {

using Vec2 = std::array<double, 2>;

enum class RewardMode { uniform, preferred };

std::string to_string(RewardMode m);
RewardMode parse_reward_mode(std::string_view name);

/// Point mass in the unit box with several absorbing goals.
struct MultiGoalEnvSpec {
  std::vector<Vec2> goals{{0.8, 0.8}, {-0.8, 0.8}, {-0.8, -0.8}, {0.8, -0.8}};
  double step_scale = 0.1;
  std::size_t horizon = 20;
  double goal_radius = 0.15;
  RewardMode reward_mode = RewardMode::uniform;
  std::size_t preferred_goal = 0;
  double other_goal_reward = 0.2;
  double start_half_width = 0.05;

  void validate() const;
  /// Reward for reaching goal g.
  double goal_reward(std::size_t g) const;

  friend bool operator==(const MultiGoalEnvSpec&, const MultiGoalEnvSpec&) = default;
};

struct StepResult {
  Vec2 next_state;
  double reward;
  bool terminal;
  int goal;  // index of the goal reached, -1 otherwise
};

/// next = clamp(state + step_scale * clamp(action), unit box); reward and
/// termination when the nearest goal is within goal_radius.
StepResult env_step(const MultiGoalEnvSpec& spec, const Vec2& state, const Vec2& action);

/// Uniform in the start box around the origin.
Vec2 sample_start(const MultiGoalEnvSpec& spec, Rng& rng);

/// Unit vector from state toward goal g.
Vec2 direction_to_goal(const MultiGoalEnvSpec& spec, const Vec2& state, std::size_t g);

}  // namespace gtp::env
