#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gtp/common/error.hpp"
#include "gtp/common/rng.hpp"
#include "gtp/env/dataset.hpp"
#include "gtp/losses/actor.hpp"
#include "gtp/losses/critic.hpp"
#include "gtp/nn/optim.hpp"
#include "gtp/ode/flowmap.hpp"
#include "gtp/train/config.hpp"

namespace gtp::train {

/// Non-finite loss or gradient during a training step.
class DivergenceError : public NumericError {
 public:
  DivergenceError(const std::string& what, std::int64_t iteration, std::vector<std::size_t> indices)
      : NumericError(what), iteration(iteration), batch_indices(std::move(indices)) {}

  std::int64_t iteration;
  std::vector<std::size_t> batch_indices;
  std::filesystem::path dump_path;  // set by run() once the dump is written
};

struct TrainState {
  TrainConfig config;
  ode::FlowMapNet actor;
  losses::CriticPair critic;
  nn::AdamState adam_actor;
  nn::AdamState adam_critic[2];
  std::int64_t iteration = 0;
  Rng rng;  // master stream; every iteration derives its own children from it
  env::MultiGoalEnvSpec env;
  env::Normalization norm;

  friend bool operator==(const TrainState&, const TrainState&) = default;
};

/// Fresh state for the 2-D environment of `data`; EMA copies equal the online nets.
TrainState init_state(const TrainConfig& cfg, const env::OfflineDataset& data);

struct StepReport {
  losses::LossBreakdown losses;
  double grad_norm_actor = 0.0;
  double grad_norm_critic = 0.0;
  std::vector<std::size_t> batch_indices;
};

struct Advantages {
  std::vector<double> q;
  std::vector<double> v;
  std::vector<double> a;
  std::vector<double> w;
};

/// Q = min of the online critics at (s, a); V = mean of min-Q over
/// n_value_samples EMA-actor draws (draw m uses rng.split(m)); w from A = Q - V.
Advantages compute_advantages(const losses::CriticPair& critic, const ode::FlowMapNet& actor,
                              const Batch& batch, const losses::AdvantageConfig& cfg, std::size_t K,
                              const Rng& rng);

/// One iteration: batch, critic update, weights, time grid, actor update, EMA, k + 1.
/// The randomness of iteration k comes from state.rng.split({tag, k}) only.
StepReport train_step(TrainState& state, const env::OfflineDataset& data);

struct RunOptions {
  std::optional<std::filesystem::path> resume;  // checkpoint to continue from
  std::optional<std::int64_t> stop_at;          // stop early at this iteration (with a checkpoint)
  std::function<void(const std::string&)> log;  // progress lines, may be empty
};

struct RunResult {
  TrainState state;
  std::filesystem::path final_checkpoint;
  std::filesystem::path metrics;
};

/// Trains up to K_total (or stop_at), writing ckpt_<k>.bin files and metrics.csv into out_dir.
/// On a non-finite loss, writes divergence_<k>.txt and rethrows DivergenceError.
RunResult run(const TrainConfig& cfg, const env::OfflineDataset& data, const std::filesystem::path& out_dir,
              const RunOptions& opts = {});

std::filesystem::path checkpoint_path(const std::filesystem::path& out_dir, std::int64_t k);

}  // namespace gtp::train
