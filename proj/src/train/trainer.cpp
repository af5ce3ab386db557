#include "gtp/train/trainer.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gtp/env/evaluate.hpp"
#include "gtp/losses/schedule.hpp"
#include "gtp/ode/solvers.hpp"
#include "gtp/train/checkpoint.hpp"

namespace gtp::train {

namespace {

constexpr std::size_t kStateDim = 2;
constexpr std::size_t kActionDim = 2;

const char* kMetricsHeader =
    "iteration,critic,consistency,flow,total_actor,mean_weight,grad_norm_actor,grad_norm_critic,"
    "eval_return,eval_hit_rate";

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

bool finite(double v) { return std::isfinite(v); }

}  // namespace

TrainState init_state(const TrainConfig& cfg, const env::OfflineDataset& data) {
  cfg.validate();
  TrainState s;
  s.config = cfg;
  s.rng = Rng(cfg.seed);
  Rng init = s.rng.split(stream::init);
  s.actor = ode::make_flowmap_net(kStateDim, kActionDim, cfg.time, cfg.actor, init);
  s.critic = losses::make_critic_pair(kStateDim, kActionDim, cfg.critic_hidden, cfg.critic_activation, init);
  s.adam_actor = nn::AdamState(s.actor.online.size(), cfg.lr_actor);
  for (auto& a : s.adam_critic) a = nn::AdamState(s.critic.spec.param_count(), cfg.lr_critic);
  s.env = data.env;
  s.norm = data.norm;
  return s;
}

Advantages compute_advantages(const losses::CriticPair& critic, const ode::FlowMapNet& actor,
                              const Batch& batch, const losses::AdvantageConfig& cfg, std::size_t K,
                              const Rng& rng) {
  cfg.validate();
  const std::size_t n = batch.size();
  if (n == 0) throw ConfigError("compute_advantages: empty batch");
  Advantages out;
  out.q = losses::min_q(critic, false, batch.states, batch.actions);
  out.v.assign(n, 0.0);
  for (std::size_t m = 0; m < cfg.n_value_samples; ++m) {
    const Matrix a = ode::sample_actions_batch(actor, batch.states, K, rng.split(m), true);
    const auto qm = losses::min_q(critic, false, batch.states, a);
    for (std::size_t r = 0; r < n; ++r) out.v[r] += qm[r];
  }
  const double inv = 1.0 / static_cast<double>(cfg.n_value_samples);
  out.a.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    out.v[r] *= inv;
    out.a[r] = out.q[r] - out.v[r];
  }
  out.w = losses::advantage_weights(out.q, out.v, cfg);
  return out;
}

StepReport train_step(TrainState& st, const env::OfflineDataset& data) {
  const TrainConfig& cfg = st.config;
  const std::int64_t k = st.iteration;
  if (k >= cfg.K_total)
    throw ConfigError("train_step: iteration " + std::to_string(k) + " is past K_total");
  const auto stream_for = [&](std::uint64_t tag) {
    return st.rng.split({tag, static_cast<std::uint64_t>(k)});
  };

  StepReport rep;
  Rng batch_rng = stream_for(stream::batch);
  const Batch batch = env::sample_batch(data, cfg.batch_size, batch_rng);
  rep.batch_indices = batch.indices;
  const std::size_t n = batch.size();

  auto diverged = [&](const std::string& what) {
    return DivergenceError("iteration " + std::to_string(k) + ": " + what, k, batch.indices);
  };

  // (2) critic
  losses::CriticLoss cl = losses::critic_loss(st.critic, st.actor, batch, cfg.gamma, cfg.n_sample_steps_target,
                                              stream_for(stream::critic_target));
  if (!finite(cl.value)) throw diverged("critic loss is not finite");
  rep.losses.critic = cl.value;
  rep.grad_norm_critic = nn::clip_grad_norm(cl.grad, cfg.grad_norm_max).norm;
  const std::size_t pc = st.critic.spec.param_count();
  const double lr_scale = cfg.lr_factor(k);
  for (auto& a : st.adam_critic) a.lr = cfg.lr_critic * lr_scale;
  st.adam_actor.lr = cfg.lr_actor * lr_scale;
  try {
    for (std::size_t j = 0; j < 2; ++j)
      nn::adam_step(st.adam_critic[j], st.critic.online[j], std::span<const double>(cl.grad).subspan(j * pc, pc));
  } catch (const NumericError& e) {
    throw diverged(std::string("critic update: ") + e.what());
  }

  // (3) weights, after the critic update
  std::vector<double> w;
  if (cfg.advantage.eta == 0.0) {
    w.assign(n, 1.0);
  } else {
    w = compute_advantages(st.critic, st.actor, batch, cfg.advantage, cfg.n_sample_steps_target,
                           stream_for(stream::value))
            .w;
  }
  double wsum = 0.0;
  for (double x : w) wsum += x;
  rep.losses.mean_weight = wsum / static_cast<double>(n);

  // (4) grid and (5) per-row times and noise
  const auto n_points = static_cast<std::size_t>(losses::step_schedule(cfg.schedule(), k));
  const ode::TimeGrid grid = ode::TimeGrid::make(cfg.time.T, cfg.time.t_min, n_points, cfg.time.rho);
  std::vector<losses::TimeTriple> triples(n);
  std::vector<double> t_flow(n);
  Matrix z(n, kActionDim);
  const Rng actor_rng = stream_for(stream::actor);
  for (std::size_t r = 0; r < n; ++r) {
    Rng rr = actor_rng.split(r);
    triples[r] = losses::sample_time_triple(grid, rr);
    for (std::size_t d = 0; d < kActionDim; ++d) z(r, d) = rr.normal();
    t_flow[r] = grid.points[rr.index(grid.points.size())];
  }

  // (6) actor
  losses::LossGrad cons = losses::consistency_loss(st.actor, batch.states, batch.actions, triples, z, w);
  losses::LossGrad flow = losses::flow_loss(st.actor, batch.states, batch.actions, t_flow, z, w);
  rep.losses.consistency = cons.value;
  rep.losses.flow = flow.value;
  rep.losses.total_actor = losses::actor_total(cons.value, flow.value, cfg.lambda_flow);
  std::vector<double> g = std::move(cons.grad);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += cfg.lambda_flow * flow.grad[i];
  if (cfg.ablation == Ablation::linear_q && cfg.lambda_q > 0.0) {
    losses::LossGrad lq = losses::linear_q_actor_loss(st.actor, st.critic, batch.states, cfg.lambda_q,
                                                      cfg.n_sample_steps_target, stream_for(stream::ablation));
    rep.losses.linear_q = lq.value;
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += lq.grad[i];
  }
  if (!finite(rep.losses.total_actor) || !finite(rep.losses.linear_q))
    throw diverged("actor loss is not finite");
  rep.grad_norm_actor = nn::clip_grad_norm(g, cfg.grad_norm_max).norm;
  try {
    nn::adam_step(st.adam_actor, st.actor.online, g);
  } catch (const NumericError& e) {
    throw diverged(std::string("actor update: ") + e.what());
  }

  // (7) EMA
  nn::ema_update(st.actor.ema, st.actor.online, cfg.ema_rate);
  for (std::size_t j = 0; j < 2; ++j) nn::ema_update(st.critic.target[j], st.critic.online[j], cfg.ema_rate);

  // (8)
  st.iteration = k + 1;
  return rep;
}

std::filesystem::path checkpoint_path(const std::filesystem::path& out_dir, std::int64_t k) {
  return out_dir / ("ckpt_" + std::to_string(k) + ".bin");
}

RunResult run(const TrainConfig& cfg, const env::OfflineDataset& data, const std::filesystem::path& out_dir,
              const RunOptions& opts) {
  cfg.validate();
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir))
    throw ConfigError("cannot create output directory '" + out_dir.string() + "'");
  const auto log = [&](const std::string& s) {
    if (opts.log) opts.log(s);
  };

  RunResult res;
  res.metrics = out_dir / "metrics.csv";
  TrainState& st = res.state;
  if (opts.resume) {
    st = load_checkpoint(*opts.resume);
    if (!(st.config == cfg)) throw ConfigError("resume: config differs from the one stored in the checkpoint");
    if (!(st.env == data.env) || !(st.norm == data.norm))
      throw ConfigError("resume: dataset does not match the checkpoint");
    // Keep metric rows up to the resume point, drop anything after it.
    std::vector<std::string> kept;
    if (std::ifstream in(res.metrics); in) {
      std::string line;
      std::getline(in, line);
      while (std::getline(in, line)) {
        const auto comma = line.find(',');
        if (std::stoll(line.substr(0, comma)) <= st.iteration) kept.push_back(line);
      }
    }
    std::ofstream out(res.metrics, std::ios::trunc);
    out << kMetricsHeader << '\n';
    for (const auto& l : kept) out << l << '\n';
    log("resumed at iteration " + std::to_string(st.iteration));
  } else {
    st = init_state(cfg, data);
    std::ofstream out(res.metrics, std::ios::trunc);
    out << kMetricsHeader << '\n';
    save_checkpoint(checkpoint_path(out_dir, 0), st);
  }

  std::ofstream metrics(res.metrics, std::ios::app);
  if (!metrics) throw ConfigError("cannot write '" + res.metrics.string() + "'");
  const std::int64_t stop = std::min(cfg.K_total, opts.stop_at.value_or(cfg.K_total));

  while (st.iteration < stop) {
    StepReport rep;
    try {
      rep = train_step(st, data);
    } catch (DivergenceError& e) {
      metrics.flush();
      e.dump_path = out_dir / ("divergence_" + std::to_string(e.iteration) + ".txt");
      std::ofstream dump(e.dump_path);
      dump << e.what() << "\niteration = " << e.iteration << "\nbatch_indices =";
      for (auto i : e.batch_indices) dump << ' ' << i;
      dump << '\n';
      throw;
    }
    const std::int64_t k = st.iteration;
    std::string eval_ret, eval_hit;
    if (cfg.eval_interval > 0 && k % cfg.eval_interval == 0) {
      const env::EvalReport er =
          env::evaluate_actor(st.env, st.actor, st.norm, cfg.eval_episodes, cfg.n_sample_steps_eval,
                              st.rng.split({stream::eval, static_cast<std::uint64_t>(k)}));
      eval_ret = fmt(er.mean_return);
      eval_hit = fmt(er.goal_hit_rate);
      log("iter " + std::to_string(k) + " critic " + fmt(rep.losses.critic) + " actor " +
          fmt(rep.losses.total_actor) + " eval_return " + eval_ret + " hit " + eval_hit);
    }
    const auto& L = rep.losses;
    metrics << k << ',' << fmt(L.critic) << ',' << fmt(L.consistency) << ',' << fmt(L.flow) << ','
            << fmt(L.total_actor) << ',' << fmt(L.mean_weight) << ',' << fmt(rep.grad_norm_actor) << ','
            << fmt(rep.grad_norm_critic) << ',' << eval_ret << ',' << eval_hit << '\n';
    if ((cfg.checkpoint_interval > 0 && k % cfg.checkpoint_interval == 0) || k == stop) {
      metrics.flush();
      save_checkpoint(checkpoint_path(out_dir, k), st);
    }
  }
  metrics.flush();
  res.final_checkpoint = checkpoint_path(out_dir, st.iteration);
  if (!fs::exists(res.final_checkpoint)) save_checkpoint(res.final_checkpoint, st);
  return res;
}

}  // namespace gtp::train
