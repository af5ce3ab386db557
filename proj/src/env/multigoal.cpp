#include "gtp/env/multigoal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gtp/common/error.hpp"

namespace gtp::env {

std::string to_string(RewardMode m) { return m == RewardMode::uniform ? "uniform" : "preferred"; }

RewardMode parse_reward_mode(std::string_view name) {
  if (name == "uniform") return RewardMode::uniform;
  if (name == "preferred") return RewardMode::preferred;
  throw ConfigError("unknown reward mode '" + std::string(name) + "'");
}

void MultiGoalEnvSpec::validate() const {
  if (goals.empty()) throw ConfigError("env: need at least one goal");
  if (horizon < 1) throw ConfigError("env: horizon must be >= 1");
  if (!(step_scale > 0.0)) throw ConfigError("env: step_scale must be > 0");
  if (preferred_goal >= goals.size()) throw ConfigError("env: preferred_goal out of range");
  double min_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < goals.size(); ++i) {
    for (double c : goals[i])
      if (std::abs(c) > 1.0) throw ConfigError("env: goals must lie inside the unit box");
    for (std::size_t j = i + 1; j < goals.size(); ++j)
      min_dist = std::min(min_dist, std::hypot(goals[i][0] - goals[j][0], goals[i][1] - goals[j][1]));
  }
  if (min_dist == 0.0) throw ConfigError("env: goals must be distinct");
  if (!(goal_radius > 0.0 && goal_radius < min_dist / 2.0))
    throw ConfigError("env: goal_radius must lie in (0, min goal distance / 2)");
}

double MultiGoalEnvSpec::goal_reward(std::size_t g) const {
  if (reward_mode == RewardMode::uniform) return 1.0;
  return g == preferred_goal ? 1.0 : other_goal_reward;
}

StepResult env_step(const MultiGoalEnvSpec& spec, const Vec2& state, const Vec2& action) {
  StepResult r{};
  for (int k = 0; k < 2; ++k) {
    const double a = std::clamp(action[k], -1.0, 1.0);
    r.next_state[k] = std::clamp(state[k] + spec.step_scale * a, -1.0, 1.0);
  }
  r.goal = -1;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < spec.goals.size(); ++g) {
    const double d = std::hypot(r.next_state[0] - spec.goals[g][0], r.next_state[1] - spec.goals[g][1]);
    if (d < best) {
      best = d;
      r.goal = static_cast<int>(g);
    }
  }
  if (best <= spec.goal_radius) {
    r.terminal = true;
    r.reward = spec.goal_reward(static_cast<std::size_t>(r.goal));
  } else {
    r.terminal = false;
    r.reward = 0.0;
    r.goal = -1;
  }
  return r;
}

Vec2 sample_start(const MultiGoalEnvSpec& spec, Rng& rng) {
  const double w = spec.start_half_width;
  return {rng.uniform(-w, w), rng.uniform(-w, w)};
}

Vec2 direction_to_goal(const MultiGoalEnvSpec& spec, const Vec2& state, std::size_t g) {
  const double dx = spec.goals[g][0] - state[0];
  const double dy = spec.goals[g][1] - state[1];
  const double n = std::hypot(dx, dy);
  if (n == 0.0) return {0.0, 0.0};
  return {dx / n, dy / n};
}

}  // namespace gtp::env
