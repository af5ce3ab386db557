#include <cmath>
#include <map>

#include "doctest.h"
#include "gtp/common/error.hpp"
#include "gtp/losses/actor.hpp"
#include "gtp/losses/advantage.hpp"
#include "gtp/losses/critic.hpp"
#include "gtp/losses/identity.hpp"
#include "gtp/losses/schedule.hpp"
#include "gtp/nn/optim.hpp"
#include "../support/fixtures.hpp"

using namespace gtp;
using namespace gtp::losses;

namespace {

// Critic whose every output equals `value`: zero weights, output bias = value.
CriticPair constant_critic(double online_value, double target_value) {
  Rng rng(1);
  CriticPair c = make_critic_pair(2, 2, {8}, nn::Activation::mish, rng);
  const auto views = nn::layer_views(c.spec);
  for (std::size_t j = 0; j < 2; ++j) {
    std::fill(c.online[j].values.begin(), c.online[j].values.end(), 0.0);
    std::fill(c.target[j].values.begin(), c.target[j].values.end(), 0.0);
    c.online[j].values[views.back().bias_offset] = online_value;
    c.target[j].values[views.back().bias_offset] = target_value;
  }
  return c;
}

}  // namespace

TEST_CASE("step schedule") {
  const ScheduleSpec s{10, 1280, 800};
  CHECK(s.phase_length() == 100);
  CHECK(step_schedule(s, 0) == 11);
  CHECK(step_schedule(s, 350) == 81);
  CHECK(step_schedule(s, 799) == 1281);
  std::int64_t prev = 0;
  for (std::int64_t k = 0; k < 800; ++k) {
    const auto n = step_schedule(s, k);
    CHECK(n >= prev);
    prev = n;
  }
  const ScheduleSpec big{10, 1280, 20000};
  CHECK(big.phase_length() == 2500);
  CHECK(step_schedule(big, 2499) == 11);
  CHECK(step_schedule(big, 2500) == 21);
  CHECK(step_schedule(big, 19999) == 1281);
  CHECK_THROWS_AS(step_schedule(s, 800), ConfigError);
  CHECK_THROWS_AS(step_schedule(s, -1), ConfigError);
  CHECK_THROWS_AS((ScheduleSpec{10, 1000, 800}.validate()), ConfigError);
  CHECK_THROWS_AS((ScheduleSpec{10, 1280, 7}.validate()), ConfigError);
}

TEST_CASE("time triples") {
  SUBCASE("two positive points force (T, t_min, 0)") {
    const auto g = ode::TimeGrid::make(5.0, 0.002, 2, 7.0);
    Rng rng(1);
    for (int i = 0; i < 20; ++i) {
      const auto tr = sample_time_triple(g, rng);
      CHECK(tr.t == 5.0);
      CHECK(tr.u == doctest::Approx(0.002));
      CHECK(tr.tau == 0.0);
    }
  }
  SUBCASE("ordering and uniform t over the eleven admissible indices") {
    const auto g = ode::TimeGrid::make(5.0, 0.002, 12, 7.0);
    Rng rng(2);
    std::map<double, int> counts;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
      const auto tr = sample_time_triple(g, rng);
      CHECK(tr.t > tr.u);
      CHECK(tr.u > tr.tau);
      CHECK(tr.tau >= 0.0);
      counts[tr.t] += 1;
    }
    CHECK(counts.size() == 11);
    CHECK(counts.count(g.points.back()) == 0);
    for (const auto& [t, c] : counts) CHECK(std::abs(c / double(n) - 1.0 / 11.0) < 0.01);
  }
  Rng rng(3);
  CHECK_THROWS_AS(sample_time_triple(ode::TimeGrid{5.0, 0.002, 7.0, {5.0}}, rng), ConfigError);
}

TEST_CASE("advantage weights") {
  AdvantageConfig cfg;
  CHECK(advantage_weight(0.0, 1.0, 0.5, cfg) == 1.0);
  CHECK(advantage_weight(1.0, 1.0, 0.5, cfg) == 1.0);
  AdvantageConfig bc = cfg;
  bc.eta = 0.0;
  for (double a : {-3.0, 0.0, 0.1, 50.0}) CHECK(advantage_weight(a, 0.0, 0.2, bc) == 1.0);
  AdvantageConfig five = cfg;
  five.eta = 5.0;
  five.eps = 1e-6;
  CHECK(advantage_weight(0.2 * (1.0 + 1e-6), 0.0, 1.0, five) == doctest::Approx(std::exp(1.0)).epsilon(1e-12));
  CHECK(advantage_weight(1e6, 0.0, 1.0, cfg) == cfg.weight_cap);
  CHECK(batch_std(std::vector<double>{1.0, 3.0}) == doctest::Approx(1.0));

  AdvantageConfig bad = cfg;
  bad.eps = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.weight_cap = 1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  const std::vector<double> q{1.0, 2.0, 3.0, 4.0}, v{2.5, 2.5, 2.5, 2.5};
  const auto w = advantage_weights(q, v, cfg);
  CHECK(w[0] == 1.0);
  CHECK(w[1] == 1.0);
  CHECK(w[2] > 1.0);
  CHECK(w[3] > w[2]);
}

TEST_CASE("consistency loss") {
  SUBCASE("zero head and a zero action put both branches on the same straight line") {
    Rng rng(1);
    ode::ActorArch arch;
    arch.hidden = {8, 8};
    const ode::FlowMapNet net = ode::make_flowmap_net(2, 2, ode::TimeDomain{}, arch, rng, true);
    Matrix s(3, 2, 0.1), a(3, 2, 0.0), z(3, 2);
    for (auto& v : z.data) v = rng.normal();
    const std::vector<TimeTriple> tr{{2.0, 1.0, 0.5}, {1.0, 0.5, 0.0}, {4.0, 0.3, 0.1}};
    const std::vector<double> w{1.0, 2.0, 3.0};
    CHECK(consistency_loss(net, s, a, tr, z, w).value == doctest::Approx(0.0).scale(1.0));
  }
  SUBCASE("tau = u makes the target the teacher's noisy action") {
    const ode::FlowMapNet net = testing::small_actor(2);
    Rng rng(3);
    Matrix s(1, 2), a(1, 2), z(1, 2);
    for (auto* m : {&s, &a, &z})
      for (auto& v : m->data) v = rng.normal();
    const TimeTriple tr{1.5, 0.4, 0.4};
    const double w = 1.7;
    const Point at{a(0, 0) + 1.5 * z(0, 0), a(0, 1) + 1.5 * z(0, 1)};
    const Point au{a(0, 0) + 0.4 * z(0, 0), a(0, 1) + 0.4 * z(0, 1)};
    const Point pred = ode::flowmap_eval(net, s.row(0), at, 1.5, 0.4, false);
    const double expect = w * ((pred[0] - au[0]) * (pred[0] - au[0]) + (pred[1] - au[1]) * (pred[1] - au[1]));
    // tau == u is outside the strict triple ordering; perturb u by one ulp upward.
    const TimeTriple tr2{1.5, std::nextafter(0.4, 1.0), 0.4};
    const std::vector<TimeTriple> trs{tr2};
    const std::vector<double> ws{w};
    CHECK(consistency_loss(net, s, a, trs, z, ws).value == doctest::Approx(expect).epsilon(1e-9));
    const std::vector<TimeTriple> bad{tr};
    CHECK_THROWS_AS(consistency_loss(net, s, a, bad, z, ws), DomainError);
  }
  SUBCASE("online equals EMA and u close to t gives a vanishing loss") {
    ode::FlowMapNet net = testing::small_actor(4);
    net.ema = net.online;
    Rng rng(5);
    Matrix s(2, 2), a(2, 2), z(2, 2);
    for (auto* m : {&s, &a, &z})
      for (auto& v : m->data) v = rng.normal();
    const std::vector<TimeTriple> tr{{1.0, 1.0 - 1e-9, 0.2}, {0.5, 0.5 - 1e-9, 0.0}};
    CHECK(consistency_loss(net, s, a, tr, z, std::vector<double>{1.0, 1.0}).value < 1e-14);
  }
  SUBCASE("gradient matches finite differences") {
    CHECK(testing::consistency_grad_check(11).max_rel < 1e-4);
  }
}

TEST_CASE("flow loss") {
  Rng rng(1);
  ode::ActorArch arch;
  arch.hidden = {8, 8};
  ode::FlowMapNet net = ode::make_flowmap_net(2, 2, ode::TimeDomain{}, arch, rng, true);
  Matrix s(2, 2, 0.3), a(2, 2), z(2, 2);
  for (auto& v : a.data) v = rng.uniform(-1, 1);
  for (auto& v : z.data) v = rng.normal();
  const std::vector<double> t{0.5, 2.0}, w{1.5, 0.5};
  const double expect = 0.5 * (1.5 * (a(0, 0) * a(0, 0) + a(0, 1) * a(0, 1)) + 0.5 * (a(1, 0) * a(1, 0) + a(1, 1) * a(1, 1)));
  CHECK(flow_loss(net, s, a, t, z, w).value == doctest::Approx(expect).epsilon(1e-14));

  // A head that outputs exactly the clean action (shared by both rows).
  Matrix same(2, 2);
  same(0, 0) = same(1, 0) = 0.25;
  same(0, 1) = same(1, 1) = -0.6;
  const auto views = nn::layer_views(net.spec);
  net.online.values[views.back().bias_offset] = 0.25;
  net.online.values[views.back().bias_offset + 1] = -0.6;
  CHECK(flow_loss(net, s, same, t, z, w).value == 0.0);

  CHECK(testing::flow_grad_check(12).max_rel < 1e-4);
}

TEST_CASE("critic loss") {
  const CriticPair c = constant_critic(2.98, 2.0);
  Batch b;
  b.states = Matrix(2, 2, 0.1);
  b.actions = Matrix(2, 2, 0.2);
  b.next_states = Matrix(2, 2, -0.1);
  b.rewards = {1.0, 1.0};
  b.terminals = {0, 1};
  b.indices = {0, 1};
  const auto y = td_targets(c, b, Matrix(2, 2, 0.0), 0.99);
  CHECK(y[0] == doctest::Approx(2.98).epsilon(1e-15));
  CHECK(y[1] == 1.0);
  Batch first = b;
  first.states = Matrix(1, 2, 0.1);
  first.actions = Matrix(1, 2, 0.2);
  first.next_states = Matrix(1, 2, -0.1);
  first.rewards = {1.0};
  first.terminals = {0};
  first.indices = {0};
  const std::vector<double> y0{y[0]};
  CHECK(critic_loss(c, first, y0).value == doctest::Approx(0.0).scale(1.0));
  CHECK(critic_loss(c, b, y).value == doctest::Approx(0.5 * 1.98 * 1.98).epsilon(1e-12));
  CHECK(testing::critic_grad_check(13).max_rel < 1e-4);
}

TEST_CASE("linear-Q ablation loss") {
  const ode::FlowMapNet actor = testing::small_actor(1);
  const CriticPair critic = testing::small_critic(2);
  Matrix s(4, 2, 0.2);
  const auto zero = linear_q_actor_loss(actor, critic, s, 0.0, 2, Rng(3));
  CHECK(zero.value == 0.0);
  for (double g : zero.grad) CHECK(g == 0.0);
  CHECK_THROWS_AS(linear_q_actor_loss(actor, critic, s, -1.0, 2, Rng(3)), ConfigError);

  SUBCASE("a critic peaked at zero pulls sampled actions toward zero") {
    // Q(s, a) = -(|a_x| + |a_y|) from four relu units.
    Rng rng(4);
    CriticPair c = make_critic_pair(2, 2, {4}, nn::Activation::relu, rng);
    auto& p = c.online[0].values;
    std::fill(p.begin(), p.end(), 0.0);
    // Input rows are [s_x, s_y, a_x, a_y]; unit j reads a_x, -a_x, a_y, -a_y.
    p[2 * 4 + 0] = 1.0;
    p[2 * 4 + 1] = -1.0;
    p[3 * 4 + 2] = 1.0;
    p[3 * 4 + 3] = -1.0;
    const std::size_t out_w = 4 * 4 + 4;
    for (std::size_t j = 0; j < 4; ++j) p[out_w + j] = -1.0;
    c.online[1] = c.online[0];

    ode::FlowMapNet net = testing::small_actor(5);
    net.action_bound = 1e9;
    Matrix states(64, 2);
    for (auto& v : states.data) v = rng.normal();
    auto mean_abs = [&](const ode::FlowMapNet& n) {
      const Matrix a = ode::sample_actions_batch(n, states, 2, Rng(6));
      double m = 0.0;
      for (double v : a.data) m += std::abs(v);
      return m / static_cast<double>(a.data.size());
    };
    const double before = mean_abs(net);
    nn::AdamState st(net.online.size(), 1e-3);
    for (int i = 0; i < 50; ++i) {
      const auto lg = linear_q_actor_loss(net, c, states, 1.0, 2, Rng(6));
      nn::adam_step(st, net.online, lg.grad);
    }
    CHECK(mean_abs(net) < 0.8 * before);
  }
  CHECK(testing::linear_q_grad_check(14).max_rel < 1e-4);
}

TEST_CASE("identity residual") {
  Rng rng(1);
  const auto constant = check_identity(constant_field_phi({0.7, -1.3}), 2, 500, rng);
  CHECK(constant.max_residual <= 1e-8);
  CHECK(constant.pass);
  const auto linear = check_identity(linear_field_phi(), 2, 500, rng);
  CHECK(linear.max_residual <= 1e-6);
  const auto bad = check_identity(corrupted_phi(constant_field_phi({0.7, -1.3})), 2, 100, rng);
  CHECK_FALSE(bad.pass);
  CHECK(bad.max_residual > 1e-3);

  // phi = 0 is the exact flow map of dx/dt = x/t, so it satisfies the identity.
  const PhiFn zero = [](std::span<const double> x, double, double) { return Point(x.size(), 0.0); };
  const Point r0 = identity_residual(zero, Point{1.0, 2.0}, 1.0, 0.5);
  CHECK(std::abs(r0[0]) + std::abs(r0[1]) < 1e-9);

  CHECK_THROWS_AS(identity_residual(linear_field_phi(), Point{1.0}, 1.0, 0.0), DomainError);
  CHECK_THROWS_AS(identity_residual(linear_field_phi(), Point{1.0}, 1.0, 1.0), DomainError);
  // The closed form for dx/dt = x is continuous at s = t.
  const Point near = linear_field_phi()(Point{1.0}, 1.0, 1.0 - 1e-9);
  CHECK(near[0] == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("actor total") {
  CHECK(actor_total(2.0, 3.0, 0.0) == 2.0);
  CHECK(actor_total(0.0, 0.0, 1.0) == 0.0);
  CHECK(actor_total(2.0, 3.0, 0.5) == 3.5);
}
