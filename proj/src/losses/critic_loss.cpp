#include "gtp/losses/critic.hpp"

#include <algorithm>

#include "gtp/common/error.hpp"

namespace gtp::losses {

CriticPair make_critic_pair(std::size_t state_dim, std::size_t action_dim,
                            std::vector<std::size_t> hidden, nn::Activation act, Rng& rng) {
  CriticPair c;
  c.spec.input_dim = state_dim + action_dim;
  c.spec.hidden_dims = std::move(hidden);
  c.spec.output_dim = 1;
  c.spec.activation = act;
  for (std::size_t j = 0; j < 2; ++j) {
    c.online[j] = nn::init_params(c.spec, rng);
    c.target[j] = c.online[j];
  }
  return c;
}

Matrix critic_inputs(const Matrix& states, const Matrix& actions) {
  if (states.rows != actions.rows) throw ConfigError("critic: state/action row mismatch");
  Matrix x(states.rows, states.cols + actions.cols);
  for (std::size_t r = 0; r < states.rows; ++r) {
    auto dst = x.row(r);
    auto s = states.row(r);
    auto a = actions.row(r);
    std::copy(s.begin(), s.end(), dst.begin());
    std::copy(a.begin(), a.end(), dst.begin() + static_cast<std::ptrdiff_t>(s.size()));
  }
  return x;
}

std::vector<double> q_values(const CriticPair& c, std::size_t j, bool use_target, const Matrix& states,
                             const Matrix& actions) {
  const Matrix out = nn::mlp_forward(c.spec, use_target ? c.target[j] : c.online[j],
                                     critic_inputs(states, actions));
  return out.data;
}

std::vector<double> min_q(const CriticPair& c, bool use_target, const Matrix& states,
                          const Matrix& actions) {
  const Matrix x = critic_inputs(states, actions);
  const Matrix q0 = nn::mlp_forward(c.spec, use_target ? c.target[0] : c.online[0], x);
  const Matrix q1 = nn::mlp_forward(c.spec, use_target ? c.target[1] : c.online[1], x);
  std::vector<double> q(x.rows);
  for (std::size_t r = 0; r < x.rows; ++r) q[r] = std::min(q0.data[r], q1.data[r]);
  return q;
}

std::vector<double> td_targets(const CriticPair& c, const Batch& batch, const Matrix& next_actions,
                               double gamma) {
  const std::vector<double> qn = min_q(c, true, batch.next_states, next_actions);
  std::vector<double> y(batch.size());
  for (std::size_t r = 0; r < y.size(); ++r)
    y[r] = batch.rewards[r] + gamma * (batch.terminals[r] ? 0.0 : 1.0) * qn[r];
  return y;
}

CriticLoss critic_loss(const CriticPair& c, const Batch& batch, std::span<const double> targets) {
  const std::size_t n = batch.size();
  if (n == 0) throw ConfigError("critic_loss: empty batch");
  if (targets.size() != n) throw ConfigError("critic_loss: target count mismatch");
  const Matrix x = critic_inputs(batch.states, batch.actions);
  const std::size_t P = c.spec.param_count();
  CriticLoss out;
  out.grad.assign(2 * P, 0.0);
  out.targets.assign(targets.begin(), targets.end());
  const double scale = 1.0 / (2.0 * static_cast<double>(n));
  for (std::size_t j = 0; j < 2; ++j) {
    nn::ForwardCache cache;
    const Matrix q = nn::mlp_forward(c.spec, c.online[j], x, nullptr, &cache);
    Matrix up(n, 1);
    for (std::size_t r = 0; r < n; ++r) {
      const double resid = q.data[r] - targets[r];
      out.value += scale * resid * resid;
      up.data[r] = 2.0 * scale * resid;
    }
    const nn::MlpGradient g = nn::mlp_backward(c.spec, c.online[j], cache, up, false);
    std::copy(g.params.begin(), g.params.end(), out.grad.begin() + static_cast<std::ptrdiff_t>(j * P));
  }
  return out;
}

CriticLoss critic_loss(const CriticPair& c, const ode::FlowMapNet& actor, const Batch& batch,
                       double gamma, std::size_t K, const Rng& rng) {
  const Matrix next_actions = ode::sample_actions_batch(actor, batch.next_states, K, rng, /*use_ema=*/true);
  const std::vector<double> y = td_targets(c, batch, next_actions, gamma);
  return critic_loss(c, batch, y);
}

}  // namespace gtp::losses
