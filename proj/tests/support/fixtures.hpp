#pragma once

// Small random actors, critics and batches shared by unit and acceptance tests.

#include <cstdint>
#include <vector>

#include "gtp/common/batch.hpp"
#include "gtp/losses/actor.hpp"
#include "gtp/losses/critic.hpp"
#include "gtp/losses/schedule.hpp"
#include "gtp/ode/flowmap.hpp"
#include "gtp/ode/solvers.hpp"
#include "oracles.hpp"

namespace gtp::testing {

/// Actor with a non-zero head and an EMA twin drawn independently.
inline ode::FlowMapNet small_actor(std::uint64_t seed, std::vector<std::size_t> hidden = {16, 16}) {
  Rng rng(seed);
  ode::ActorArch arch;
  arch.hidden = std::move(hidden);
  ode::FlowMapNet net = ode::make_flowmap_net(2, 2, ode::TimeDomain{}, arch, rng, false);
  net.ema = nn::init_params(net.spec, rng);
  return net;
}

inline losses::CriticPair small_critic(std::uint64_t seed, std::vector<std::size_t> hidden = {16, 16}) {
  Rng rng(seed);
  losses::CriticPair c = losses::make_critic_pair(2, 2, std::move(hidden), nn::Activation::mish, rng);
  for (auto& t : c.target) t = nn::init_params(c.spec, rng);
  return c;
}

inline Batch random_batch(std::size_t n, Rng& rng) {
  Batch b;
  b.states = Matrix(n, 2);
  b.actions = Matrix(n, 2);
  b.next_states = Matrix(n, 2);
  b.rewards.resize(n);
  b.terminals.resize(n);
  b.indices.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t k = 0; k < 2; ++k) {
      b.states(r, k) = rng.normal();
      b.actions(r, k) = rng.uniform(-1.0, 1.0);
      b.next_states(r, k) = rng.normal();
    }
    b.rewards[r] = rng.uniform() < 0.3 ? 1.0 : 0.0;
    b.terminals[r] = rng.uniform() < 0.2 ? 1 : 0;
    b.indices[r] = r;
  }
  return b;
}

struct ActorLossInputs {
  Batch batch;
  std::vector<losses::TimeTriple> triples;
  std::vector<double> t_flow;
  Matrix z;
  std::vector<double> w;
};

inline ActorLossInputs actor_inputs_for(std::size_t n, Rng& rng) {
  ActorLossInputs in;
  in.batch = random_batch(n, rng);
  const ode::TimeGrid grid = ode::TimeGrid::make(5.0, 0.002, 21, 7.0);
  in.z = Matrix(n, 2);
  for (std::size_t r = 0; r < n; ++r) {
    in.triples.push_back(losses::sample_time_triple(grid, rng));
    in.t_flow.push_back(grid.points[rng.index(grid.size())]);
    in.z(r, 0) = rng.normal();
    in.z(r, 1) = rng.normal();
    in.w.push_back(rng.uniform(0.5, 3.0));
  }
  return in;
}

inline GradCompare consistency_grad_check(std::uint64_t seed, std::size_t width = 16) {
  Rng rng(seed);
  const ode::FlowMapNet net = small_actor(seed * 7 + 1, {width, width});
  const ActorLossInputs in = actor_inputs_for(6, rng);
  const auto lg = losses::consistency_loss(net, in.batch.states, in.batch.actions, in.triples, in.z, in.w);
  auto f = [&](const std::vector<double>& p) {
    ode::FlowMapNet m = net;
    m.online.values = p;
    return losses::consistency_loss(m, in.batch.states, in.batch.actions, in.triples, in.z, in.w).value;
  };
  return compare_gradients(lg.grad, fd_gradient(f, net.online.values));
}

inline GradCompare flow_grad_check(std::uint64_t seed, std::size_t width = 16) {
  Rng rng(seed);
  const ode::FlowMapNet net = small_actor(seed * 7 + 2, {width, width});
  const ActorLossInputs in = actor_inputs_for(6, rng);
  const auto lg = losses::flow_loss(net, in.batch.states, in.batch.actions, in.t_flow, in.z, in.w);
  auto f = [&](const std::vector<double>& p) {
    ode::FlowMapNet m = net;
    m.online.values = p;
    return losses::flow_loss(m, in.batch.states, in.batch.actions, in.t_flow, in.z, in.w).value;
  };
  return compare_gradients(lg.grad, fd_gradient(f, net.online.values));
}

inline GradCompare critic_grad_check(std::uint64_t seed, std::size_t width = 16) {
  Rng rng(seed);
  const ode::FlowMapNet actor = small_actor(seed * 7 + 3, {width, width});
  const losses::CriticPair critic = small_critic(seed * 7 + 4, {width, width});
  const Batch batch = random_batch(6, rng);
  const Rng sample_rng = rng.split(1);
  const auto cl = losses::critic_loss(critic, actor, batch, 0.99, 2, sample_rng);
  std::vector<double> flat = critic.online[0].values;
  flat.insert(flat.end(), critic.online[1].values.begin(), critic.online[1].values.end());
  const std::size_t P = critic.spec.param_count();
  auto f = [&](const std::vector<double>& p) {
    losses::CriticPair c = critic;
    c.online[0].values.assign(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(P));
    c.online[1].values.assign(p.begin() + static_cast<std::ptrdiff_t>(P), p.end());
    return losses::critic_loss(c, actor, batch, 0.99, 2, sample_rng).value;
  };
  return compare_gradients(cl.grad, fd_gradient(f, flat));
}

inline GradCompare linear_q_grad_check(std::uint64_t seed, std::size_t width = 16) {
  Rng rng(seed);
  const ode::FlowMapNet actor = small_actor(seed * 7 + 5, {width, width});
  const losses::CriticPair critic = small_critic(seed * 7 + 6, {width, width});
  const Batch batch = random_batch(6, rng);
  const Rng sample_rng = rng.split(2);
  const auto lg = losses::linear_q_actor_loss(actor, critic, batch.states, 0.7, 2, sample_rng);
  auto f = [&](const std::vector<double>& p) {
    ode::FlowMapNet m = actor;
    m.online.values = p;
    return losses::linear_q_actor_loss(m, critic, batch.states, 0.7, 2, sample_rng).value;
  };
  return compare_gradients(lg.grad, fd_gradient(f, actor.online.values));
}

}  // namespace gtp::testing
