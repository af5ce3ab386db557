#include "gtp/losses/actor.hpp"

#include <cmath>

#include "gtp/common/error.hpp"

namespace gtp::losses {

namespace {

void check_rows(const Matrix& actions, const Matrix& z, std::size_t n_times, std::size_t n_weights) {
  const std::size_t n = actions.rows;
  if (n == 0) throw ConfigError("actor loss: empty batch");
  if (z.rows != n || z.cols != actions.cols || n_times != n || n_weights != n)
    throw ConfigError("actor loss: batch components disagree in size");
}

}  // namespace

LossGrad consistency_loss(const ode::FlowMapNet& net, const Matrix& states, const Matrix& actions,
                          std::span<const TimeTriple> triples, const Matrix& z,
                          std::span<const double> weights) {
  check_rows(actions, z, triples.size(), weights.size());
  const std::size_t n = actions.rows;
  const std::size_t d = actions.cols;
  Matrix a_t(n, d), a_u(n, d);
  std::vector<double> tt(n), uu(n), ss(n);
  for (std::size_t r = 0; r < n; ++r) {
    const auto& tr = triples[r];
    if (!(tr.t > tr.u && tr.u > tr.tau && tr.tau >= 0.0))
      throw DomainError("consistency_loss: need t > u > tau >= 0");
    tt[r] = tr.t;
    uu[r] = tr.u;
    ss[r] = tr.tau;
    for (std::size_t k = 0; k < d; ++k) {
      a_t(r, k) = actions(r, k) + tr.t * z(r, k);
      a_u(r, k) = actions(r, k) + tr.u * z(r, k);
    }
  }
  const Matrix target = ode::flowmap_eval_batch(net, states, a_u, uu, ss, /*use_ema=*/true);

  nn::ForwardCache cache;
  const Matrix phi = ode::phi_batch(net, states, a_t, tt, ss, /*use_ema=*/false, &cache);
  LossGrad out;
  Matrix up(n, d);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r) {
    const double s = ss[r] / tt[r];
    double row = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double pred = (1.0 - s) * phi(r, k) + s * a_t(r, k);
      const double diff = pred - target(r, k);
      row += diff * diff;
      up(r, k) = 2.0 * weights[r] * inv_n * diff * (1.0 - s);
    }
    out.value += weights[r] * row * inv_n;
  }
  out.grad = ode::phi_backward(net, cache, tt, up, false, false).params;
  return out;
}

LossGrad flow_loss(const ode::FlowMapNet& net, const Matrix& states, const Matrix& actions,
                   std::span<const double> t, const Matrix& z, std::span<const double> weights) {
  check_rows(actions, z, t.size(), weights.size());
  const std::size_t n = actions.rows;
  const std::size_t d = actions.cols;
  Matrix a_t(n, d);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t k = 0; k < d; ++k) a_t(r, k) = actions(r, k) + t[r] * z(r, k);

  nn::ForwardCache cache;
  const Matrix phi = ode::phi_batch(net, states, a_t, t, t, /*use_ema=*/false, &cache);
  LossGrad out;
  Matrix up(n, d);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r) {
    double row = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double diff = phi(r, k) - actions(r, k);
      row += diff * diff;
      up(r, k) = 2.0 * weights[r] * inv_n * diff;
    }
    out.value += weights[r] * row * inv_n;
  }
  out.grad = ode::phi_backward(net, cache, t, up, false, false).params;
  return out;
}

LossGrad linear_q_actor_loss(const ode::FlowMapNet& net, const CriticPair& critic, const Matrix& states,
                             double lambda_q, std::size_t K, const Rng& rng) {
  if (!(lambda_q >= 0.0)) throw ConfigError("linear_q_actor_loss: lambda_q must be >= 0");
  const std::size_t n = states.rows;
  if (n == 0) throw ConfigError("linear_q_actor_loss: empty batch");
  LossGrad out;
  out.grad.assign(net.spec.param_count(), 0.0);
  if (lambda_q == 0.0) return out;

  ode::SampleTape tape;
  const Matrix actions = ode::sample_actions_batch(net, states, K, rng, /*use_ema=*/false, &tape);
  const Matrix x = critic_inputs(states, actions);
  Matrix up(n, 1, -lambda_q / static_cast<double>(n));
  nn::ForwardCache cache;
  const Matrix q = nn::mlp_forward(critic.spec, critic.online[0], x, nullptr, &cache);
  for (std::size_t r = 0; r < n; ++r) out.value -= lambda_q * q.data[r] / static_cast<double>(n);
  const nn::MlpGradient g = nn::mlp_backward(critic.spec, critic.online[0], cache, up, true);

  Matrix d_actions(n, net.action_dim);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t k = 0; k < net.action_dim; ++k) d_actions(r, k) = g.inputs(r, states.cols + k);
  out.grad = ode::sample_actions_backward(net, tape, d_actions, /*use_ema=*/false);
  return out;
}

double actor_total(double consistency, double flow, double lambda_flow) {
  return consistency + lambda_flow * flow;
}

}  // namespace gtp::losses
