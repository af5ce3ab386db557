#include "gtp/env/evaluate.hpp"

#include <cmath>
#include <limits>

#include "gtp/common/error.hpp"

namespace gtp::env {

std::vector<TrajectoryStep> rollout(const MultiGoalEnvSpec& spec, const Policy& policy, Rng& rng,
                                    EpisodeLog* log) {
  std::vector<TrajectoryStep> steps;
  Vec2 s = sample_start(spec, rng);
  double ret = 0.0;
  int goal = -1;
  for (std::size_t k = 0; k < spec.horizon; ++k) {
    const Vec2 a = policy(s, rng);
    steps.push_back({k, s, a});
    const StepResult r = env_step(spec, s, a);
    ret += r.reward;
    s = r.next_state;
    if (r.terminal) {
      goal = r.goal;
      break;
    }
  }
  if (log) {
    log->ret = ret;
    log->goal = goal;
    log->steps = steps.size();
  }
  return steps;
}

EvalReport evaluate_policy(const MultiGoalEnvSpec& spec, const Policy& policy, std::size_t n_episodes,
                           const Rng& rng) {
  spec.validate();
  if (n_episodes == 0) throw ConfigError("evaluate_policy: n_episodes must be >= 1");
  EvalReport rep;
  rep.per_goal_share.assign(spec.goals.size(), 0.0);
  rep.episodes.resize(n_episodes);
  for (std::size_t e = 0; e < n_episodes; ++e) {
    Rng er = rng.split(e);
    EpisodeLog& log = rep.episodes[e];
    log.episode = e;
    rollout(spec, policy, er, &log);
  }
  const auto n = static_cast<double>(n_episodes);
  for (const auto& log : rep.episodes) {
    rep.mean_return += log.ret;
    if (log.goal >= 0) {
      rep.goal_hit_rate += 1.0;
      rep.per_goal_share[static_cast<std::size_t>(log.goal)] += 1.0;
    }
  }
  rep.mean_return /= n;
  rep.goal_hit_rate /= n;
  for (double& s : rep.per_goal_share) s /= n;
  return rep;
}

Policy actor_policy(const ode::FlowMapNet& net, const Normalization& norm, std::size_t K, bool use_ema) {
  if (K == 0) throw ConfigError("actor_policy: K must be >= 1");
  if (net.state_dim != 2 || net.action_dim != 2) throw ConfigError("actor_policy: actor must be 2-D");
  return [&net, norm, K, use_ema](const Vec2& state, Rng& rng) {
    const Vec2 s = norm.normalize(state);
    const Point a = ode::sample_actions(net, s, K, rng, use_ema);
    return Vec2{a[0], a[1]};
  };
}

Policy scripted_policy(const MultiGoalEnvSpec& spec) {
  return [spec](const Vec2& state, Rng&) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < spec.goals.size(); ++g) {
      const double d = std::hypot(spec.goals[g][0] - state[0], spec.goals[g][1] - state[1]);
      if (d < best_d) {
        best_d = d;
        best = g;
      }
    }
    return direction_to_goal(spec, state, best);
  };
}

Policy random_policy() {
  return [](const Vec2&, Rng& rng) { return Vec2{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)}; };
}

EvalReport evaluate_actor(const MultiGoalEnvSpec& spec, const ode::FlowMapNet& net, const Normalization& norm,
                          std::size_t n_episodes, std::size_t K, const Rng& rng) {
  return evaluate_policy(spec, actor_policy(net, norm, K), n_episodes, rng);
}

}  // namespace gtp::env
