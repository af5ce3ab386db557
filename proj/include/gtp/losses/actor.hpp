#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gtp/common/rng.hpp"
#include "gtp/losses/critic.hpp"
#include "gtp/losses/schedule.hpp"
#include "gtp/ode/flowmap.hpp"

namespace gtp::losses {

/// Scalar loss and its gradient with respect to the online actor parameters.
struct LossGrad {
  double value = 0.0;
  std::vector<double> grad;
};

/// Trajectory consistency, averaged over rows:
///   w ||Phi_online(s, a + t z, t, tau) - sg[Phi_ema(s, a + u z, u, tau)]||^2.
LossGrad consistency_loss(const ode::FlowMapNet& net, const Matrix& states, const Matrix& actions,
                          std::span<const TimeTriple> triples, const Matrix& z,
                          std::span<const double> weights);

/// Instantaneous flow loss, averaged over rows: w ||a - phi_online(s, a + t z, t, t)||^2.
LossGrad flow_loss(const ode::FlowMapNet& net, const Matrix& states, const Matrix& actions,
                   std::span<const double> t, const Matrix& z, std::span<const double> weights);

/// Ablation: -lambda_q * mean Q_0(s, sample_actions(online actor, s)), with the
/// gradient taken through the sampler. Noise for row r comes from rng.split(r).
LossGrad linear_q_actor_loss(const ode::FlowMapNet& net, const CriticPair& critic, const Matrix& states,
                             double lambda_q, std::size_t K, const Rng& rng);

double actor_total(double consistency, double flow, double lambda_flow);

struct LossBreakdown {
  double consistency = 0.0;
  double flow = 0.0;
  double total_actor = 0.0;
  double critic = 0.0;
  double mean_weight = 1.0;
  double linear_q = 0.0;
};

}  // namespace gtp::losses
