#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "gtp/common/rng.hpp"
#include "gtp/env/dataset.hpp"
#include "gtp/env/multigoal.hpp"
#include "gtp/ode/flowmap.hpp"

namespace gtp::env {

/// Maps a raw environment state to an action, drawing any noise from rng.
using Policy = std::function<Vec2(const Vec2& state, Rng& rng)>;

struct EpisodeLog {
  std::size_t episode = 0;
  double ret = 0.0;
  int goal = -1;  // goal reached, -1 when the horizon ran out
  std::size_t steps = 0;
};

struct EvalReport {
  double mean_return = 0.0;
  double goal_hit_rate = 0.0;
  std::vector<double> per_goal_share;  // fraction of all episodes ending at each goal
  std::vector<EpisodeLog> episodes;
};

struct TrajectoryStep {
  std::size_t step;
  Vec2 state;
  Vec2 action;
};

/// One episode from a start drawn out of rng; stops at a goal or the horizon.
std::vector<TrajectoryStep> rollout(const MultiGoalEnvSpec& spec, const Policy& policy, Rng& rng,
                                    EpisodeLog* log = nullptr);

/// Episode e runs on rng.split(e).
EvalReport evaluate_policy(const MultiGoalEnvSpec& spec, const Policy& policy, std::size_t n_episodes,
                           const Rng& rng);

/// Sampler policy: normalizes the state and draws one action with K jumps.
Policy actor_policy(const ode::FlowMapNet& net, const Normalization& norm, std::size_t K,
                    bool use_ema = false);

/// Heads straight for the nearest goal.
Policy scripted_policy(const MultiGoalEnvSpec& spec);

/// Uniform actions in the box.
Policy random_policy();

EvalReport evaluate_actor(const MultiGoalEnvSpec& spec, const ode::FlowMapNet& net, const Normalization& norm,
                          std::size_t n_episodes, std::size_t K, const Rng& rng);

}  // namespace gtp::env
