#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "gtp/common/batch.hpp"
#include "gtp/common/rng.hpp"
#include "gtp/nn/mlp.hpp"
#include "gtp/ode/flowmap.hpp"

namespace gtp::losses {

/// Double Q-network with EMA targets. Input is [state, action], output one scalar.
struct CriticPair {
  nn::MlpSpec spec;
  std::array<nn::ParamVector, 2> online;
  std::array<nn::ParamVector, 2> target;

  friend bool operator==(const CriticPair&, const CriticPair&) = default;
};

CriticPair make_critic_pair(std::size_t state_dim, std::size_t action_dim,
                            std::vector<std::size_t> hidden, nn::Activation act, Rng& rng);

Matrix critic_inputs(const Matrix& states, const Matrix& actions);

std::vector<double> q_values(const CriticPair& c, std::size_t j, bool use_target, const Matrix& states,
                             const Matrix& actions);

/// min over the two critics, per row.
std::vector<double> min_q(const CriticPair& c, bool use_target, const Matrix& states,
                          const Matrix& actions);

/// y = r + gamma (1 - terminal) min_j Q_target_j(s', a'), treated as a constant.
std::vector<double> td_targets(const CriticPair& c, const Batch& batch, const Matrix& next_actions,
                               double gamma);

struct CriticLoss {
  double value = 0.0;
  std::vector<double> grad;     // critic 0 parameters followed by critic 1 parameters
  std::vector<double> targets;
};

/// Mean over rows and over both critics of (y - Q_j(s, a))^2.
CriticLoss critic_loss(const CriticPair& c, const Batch& batch, std::span<const double> targets);

/// Samples a' from the EMA actor (stream `rng`, K jumps) and evaluates the TD loss.
CriticLoss critic_loss(const CriticPair& c, const ode::FlowMapNet& actor, const Batch& batch,
                       double gamma, std::size_t K, const Rng& rng);

}  // namespace gtp::losses
