#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "gtp/losses/advantage.hpp"
#include "gtp/losses/schedule.hpp"
#include "gtp/nn/activation.hpp"
#include "gtp/ode/flowmap.hpp"

namespace gtp::train {

enum class Ablation { none, linear_q };

std::string to_string(Ablation a);
Ablation parse_ablation(std::string_view name);

enum class LrDecay { none, cosine };

std::string to_string(LrDecay d);
LrDecay parse_lr_decay(std::string_view name);

struct TrainConfig {
  double lr_actor = 3e-4;
  double lr_critic = 3e-4;
  LrDecay lr_decay = LrDecay::none;  // applied to both learning rates
  double lambda_flow = 1.0;
  double gamma = 0.99;
  double ema_rate = 0.005;
  double grad_norm_max = 5.0;
  std::size_t batch_size = 256;
  std::int64_t K_total = 20000;
  ode::TimeDomain time;
  std::int64_t s0 = 10;
  std::int64_t s1 = 1280;
  std::uint64_t seed = 0;
  std::size_t n_sample_steps_eval = 5;
  // Sampler steps for TD targets, value estimates and the linear-Q ablation.
  std::size_t n_sample_steps_target = 5;
  losses::AdvantageConfig advantage;  // holds eta
  Ablation ablation = Ablation::none;
  double lambda_q = 0.0;
  ode::ActorArch actor;
  std::vector<std::size_t> critic_hidden{64, 64};
  nn::Activation critic_activation = nn::Activation::mish;
  std::int64_t eval_interval = 500;  // 0 disables periodic evaluation
  std::size_t eval_episodes = 10;
  std::int64_t checkpoint_interval = 5000;  // 0 keeps only the first and last

  losses::ScheduleSpec schedule() const { return {s0, s1, K_total}; }
  /// Learning-rate multiplier for iteration k: 1, or 0.5 (1 + cos(pi k / K_total)).
  double lr_factor(std::int64_t k) const;
  void validate() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

// Flat "key = value" text. Blank lines and lines starting with '#' are
// ignored; keys not listed in to_text() are rejected. Lists are comma separated.
TrainConfig parse_config(std::string_view text);
TrainConfig load_config(const std::filesystem::path& path);
/// Every key, in a fixed order, with reals in shortest round-trip form.
std::string to_text(const TrainConfig& cfg);

}  // namespace gtp::train
