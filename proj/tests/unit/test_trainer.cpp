#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "gtp/common/error.hpp"
#include "gtp/env/dataset.hpp"
#include "gtp/train/checkpoint.hpp"
#include "gtp/train/config.hpp"
#include "gtp/train/trainer.hpp"

using namespace gtp;
using namespace gtp::train;
namespace fs = std::filesystem;

namespace {

TrainConfig tiny_config() {
  TrainConfig c;
  c.batch_size = 16;
  c.K_total = 40;
  c.actor.hidden = {16, 16};
  c.critic_hidden = {16, 16};
  c.eval_interval = 0;
  c.checkpoint_interval = 0;
  c.advantage.n_value_samples = 2;
  c.n_sample_steps_target = 2;
  c.seed = 5;
  return c;
}

const env::OfflineDataset& small_data() {
  static const env::OfflineDataset d = [] {
    env::MultiGoalEnvSpec spec;
    spec.reward_mode = env::RewardMode::preferred;
    return env::gen_dataset(spec, 8, 0.1, 3);
  }();
  return d;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("gtp_unit_" + name);
  fs::remove_all(p);
  return p;
}

std::string file_bytes(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream is(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(is, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("config text") {
  const TrainConfig def = parse_config("");
  CHECK(def.lr_actor == 3e-4);
  CHECK(def.lr_critic == 3e-4);
  CHECK(def.advantage.eta == 1.0);
  CHECK(def.lambda_flow == 1.0);
  CHECK(def.gamma == 0.99);
  CHECK(def.ema_rate == 0.005);
  CHECK(def.grad_norm_max == 5.0);
  CHECK(def.batch_size == 256);
  CHECK(def.K_total == 20000);
  CHECK(def.n_sample_steps_eval == 5);
  CHECK(def.schedule().phase_length() == 2500);

  TrainConfig c = tiny_config();
  c.ablation = Ablation::linear_q;
  c.lambda_q = 0.25;
  c.time.T = 3.3;
  CHECK(parse_config(to_text(c)) == c);

  const TrainConfig p = parse_config("# comment\n\neta = 0\nactor_hidden = 32, 32\nablation = linear_q\n");
  CHECK(p.advantage.eta == 0.0);
  CHECK(p.actor.hidden == std::vector<std::size_t>{32, 32});
  CHECK(p.ablation == Ablation::linear_q);

  try {
    parse_config("eta = 1\nlearning_rate = 3\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("learning_rate") != std::string::npos);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  try {
    parse_config("eta = 1\n\nthis is not a pair\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config("gamma = 1.5"), ConfigError);
  CHECK_THROWS_AS(parse_config("ema_rate = 0"), ConfigError);
  CHECK_THROWS_AS(parse_config("batch_size = x"), ConfigError);
  CHECK_THROWS_AS(parse_config("K_total = 3"), ConfigError);
  CHECK_NOTHROW(parse_config("K_total = 0"));
  CHECK_THROWS_AS(parse_config("lr_decay = linear"), ConfigError);
}

TEST_CASE("learning-rate decay") {
  TrainConfig c;
  c.K_total = 1000;
  CHECK(c.lr_factor(700) == 1.0);
  c.lr_decay = LrDecay::cosine;
  CHECK(c.lr_factor(0) == 1.0);
  CHECK(c.lr_factor(500) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(c.lr_factor(250) == doctest::Approx((2.0 + std::sqrt(2.0)) / 4.0).epsilon(1e-15));
  CHECK(c.lr_factor(999) > 0.0);

  // The optimizer sees the scaled rate on the step it takes.
  TrainConfig t = tiny_config();
  t.lr_decay = LrDecay::cosine;
  t.K_total = 40;
  TrainState s = init_state(t, small_data());
  for (int i = 0; i < 20; ++i) train_step(s, small_data());
  CHECK(s.adam_actor.lr == doctest::Approx(t.lr_actor * t.lr_factor(19)).epsilon(1e-15));
  CHECK(s.adam_critic[1].lr == doctest::Approx(t.lr_critic * t.lr_factor(19)).epsilon(1e-15));
}

TEST_CASE("initial state") {
  const TrainState s = init_state(tiny_config(), small_data());
  CHECK(s.actor.ema == s.actor.online);
  CHECK(s.critic.target[0] == s.critic.online[0]);
  CHECK(s.critic.target[1] == s.critic.online[1]);
  CHECK_FALSE(s.critic.online[0] == s.critic.online[1]);
  CHECK(s.iteration == 0);
}

TEST_CASE("advantages") {
  TrainState s = init_state(tiny_config(), small_data());
  Rng rng(1);
  const Batch b = env::sample_batch(small_data(), 16, rng);
  losses::AdvantageConfig cfg;

  SUBCASE("constant critics give zero advantage and unit weight") {
    losses::CriticPair c = s.critic;
    const auto views = nn::layer_views(c.spec);
    for (auto& p : c.online) {
      std::fill(p.values.begin(), p.values.end(), 0.0);
      p.values[views.back().bias_offset] = 0.7;
    }
    const Advantages adv = compute_advantages(c, s.actor, b, cfg, 2, Rng(2));
    for (std::size_t r = 0; r < 16; ++r) {
      CHECK(adv.a[r] == 0.0);
      CHECK(adv.w[r] == 1.0);
    }
  }
  SUBCASE("shifting both critics leaves the weights unchanged") {
    losses::CriticPair c = s.critic;
    const Advantages base = compute_advantages(c, s.actor, b, cfg, 2, Rng(2));
    const auto views = nn::layer_views(c.spec);
    for (auto& p : c.online) p.values[views.back().bias_offset] += 3.0;
    const Advantages shifted = compute_advantages(c, s.actor, b, cfg, 2, Rng(2));
    for (std::size_t r = 0; r < 16; ++r) CHECK(shifted.w[r] == doctest::Approx(base.w[r]).epsilon(1e-9));
  }
  SUBCASE("larger Q at the same state gives a weakly larger weight") {
    Batch same = b;
    for (std::size_t r = 0; r < 16; ++r) {
      same.states(r, 0) = b.states(0, 0);
      same.states(r, 1) = b.states(0, 1);
      same.actions(r, 0) = -1.0 + 2.0 * static_cast<double>(r) / 15.0;
      same.actions(r, 1) = 0.3;
    }
    cfg.eta = 3.0;
    const Advantages adv = compute_advantages(s.critic, s.actor, same, cfg, 2, Rng(4));
    for (std::size_t i = 0; i < 16; ++i)
      for (std::size_t j = 0; j < 16; ++j)
        if (adv.q[i] > adv.q[j]) CHECK(adv.w[i] >= adv.w[j]);
  }
}

TEST_CASE("train step") {
  SUBCASE("eta = 0 trains the critic but the actor update ignores it") {
    TrainConfig cfg = tiny_config();
    cfg.advantage.eta = 0.0;
    TrainState a = init_state(cfg, small_data());
    TrainState b = a;
    Rng scramble(9);
    for (auto& p : b.critic.online)
      for (auto& v : p.values) v = scramble.normal();
    const StepReport ra = train_step(a, small_data());
    const StepReport rb = train_step(b, small_data());
    CHECK(ra.losses.mean_weight == 1.0);
    CHECK(a.actor == b.actor);
    CHECK(a.adam_actor == b.adam_actor);
    CHECK_FALSE(a.critic == b.critic);
    CHECK_FALSE(a.critic.online[0] == init_state(cfg, small_data()).critic.online[0]);
  }
  SUBCASE("identical states step identically") {
    TrainState a = init_state(tiny_config(), small_data());
    TrainState b = a;
    for (int i = 0; i < 3; ++i) {
      train_step(a, small_data());
      train_step(b, small_data());
    }
    CHECK(a == b);
    CHECK(a.iteration == 3);
  }
  SUBCASE("vanishing learning rate barely moves the parameters") {
    env::OfflineDataset one = small_data();
    one.transitions.resize(1);
    one.norm = env::compute_normalization(one.transitions);
    TrainConfig cfg = tiny_config();
    cfg.lr_actor = cfg.lr_critic = 1e-12;
    TrainState s = init_state(cfg, one);
    const TrainState before = s;
    train_step(s, one);
    for (std::size_t i = 0; i < s.actor.online.size(); ++i)
      CHECK(std::abs(s.actor.online.values[i] - before.actor.online.values[i]) <= 1.0001e-12);
    for (std::size_t j = 0; j < 2; ++j)
      for (std::size_t i = 0; i < s.critic.online[j].size(); ++i)
        CHECK(std::abs(s.critic.online[j].values[i] - before.critic.online[j].values[i]) <= 1.0001e-12);
  }
  SUBCASE("linear-Q ablation adds its term") {
    TrainConfig cfg = tiny_config();
    cfg.ablation = Ablation::linear_q;
    cfg.lambda_q = 0.5;
    TrainState s = init_state(cfg, small_data());
    const StepReport r = train_step(s, small_data());
    CHECK(r.losses.linear_q != 0.0);
  }
  SUBCASE("past the schedule") {
    TrainState s = init_state(tiny_config(), small_data());
    s.iteration = 40;
    CHECK_THROWS_AS(train_step(s, small_data()), ConfigError);
  }
  SUBCASE("non-finite reward aborts with the batch indices") {
    env::OfflineDataset bad = small_data();
    for (auto& t : bad.transitions) t.reward = 1e300;
    TrainState s = init_state(tiny_config(), bad);
    try {
      train_step(s, bad);
      FAIL("expected DivergenceError");
    } catch (const DivergenceError& e) {
      CHECK(e.batch_indices.size() == 16);
      CHECK(e.iteration == 0);
    }
  }
}

TEST_CASE("checkpoints") {
  TrainState s = init_state(tiny_config(), small_data());
  train_step(s, small_data());
  std::stringstream a;
  write_checkpoint(a, s);
  const std::string bytes = a.str();
  std::stringstream in(bytes);
  const TrainState back = read_checkpoint(in);
  CHECK(back == s);
  std::stringstream again;
  write_checkpoint(again, back);
  CHECK(again.str() == bytes);

  std::string wrong = bytes;
  wrong[8] = 7;
  std::stringstream ws(wrong);
  CHECK_THROWS_AS(read_checkpoint(ws), ParseError);
  std::stringstream magic("NOTACKPT");
  CHECK_THROWS_AS(read_checkpoint(magic), ParseError);
  std::stringstream cut(bytes.substr(0, bytes.size() / 2));
  CHECK_THROWS_AS(read_checkpoint(cut), ParseError);
  std::stringstream extra(bytes + "x");
  CHECK_THROWS_AS(read_checkpoint(extra), ParseError);
}

TEST_CASE("run") {
  SUBCASE("K_total = 0 writes only the initial checkpoint") {
    TrainConfig cfg = tiny_config();
    cfg.K_total = 0;
    const fs::path dir = fresh_dir("k0");
    const RunResult r = run(cfg, small_data(), dir);
    CHECK(r.final_checkpoint == checkpoint_path(dir, 0));
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(dir))
      if (e.path().extension() == ".bin") ++files;
    CHECK(files == 1);
    CHECK(read_csv(r.metrics).size() == 1);
  }
  SUBCASE("metrics rows and identities") {
    TrainConfig cfg = tiny_config();
    cfg.K_total = 10;
    cfg.advantage.eta = 0.0;
    cfg.lambda_flow = 0.7;
    cfg.eval_interval = 5;
    cfg.eval_episodes = 2;
    const fs::path dir = fresh_dir("k10");
    const RunResult r = run(cfg, small_data(), dir);
    CHECK(fs::exists(checkpoint_path(dir, 10)));
    const auto rows = read_csv(r.metrics);
    REQUIRE(rows.size() == 11);
    CHECK(rows[0] == std::vector<std::string>{"iteration", "critic", "consistency", "flow", "total_actor",
                                              "mean_weight", "grad_norm_actor", "grad_norm_critic",
                                              "eval_return", "eval_hit_rate"});
    for (std::size_t i = 1; i < rows.size(); ++i) {
      REQUIRE(rows[i].size() == 10);
      CHECK(std::stoi(rows[i][0]) == static_cast<int>(i));
      const double cons = std::stod(rows[i][2]), flow = std::stod(rows[i][3]), total = std::stod(rows[i][4]);
      CHECK(std::abs(total - (cons + 0.7 * flow)) <= 1e-12 * std::max(1.0, std::abs(total)));
      CHECK(rows[i][5] == "1");
      CHECK(rows[i][8].empty() == (i % 5 != 0));
    }
  }
  SUBCASE("a split run resumes byte-identically") {
    TrainConfig cfg = tiny_config();
    cfg.checkpoint_interval = 20;
    const fs::path full = fresh_dir("full"), split = fresh_dir("split");
    const RunResult a = run(cfg, small_data(), full);
    RunOptions first;
    first.stop_at = 20;
    const RunResult half = run(cfg, small_data(), split, first);
    CHECK(half.state.iteration == 20);
    RunOptions second;
    second.resume = checkpoint_path(split, 20);
    const RunResult b = run(cfg, small_data(), split, second);
    CHECK(file_bytes(a.final_checkpoint) == file_bytes(b.final_checkpoint));
    CHECK(file_bytes(a.metrics) == file_bytes(b.metrics));

    TrainConfig other = cfg;
    other.lambda_flow = 0.5;
    CHECK_THROWS_AS(run(other, small_data(), split, second), ConfigError);
  }
  SUBCASE("divergence leaves a dump") {
    env::OfflineDataset bad = small_data();
    for (auto& t : bad.transitions) t.reward = 1e300;
    const fs::path dir = fresh_dir("diverge");
    try {
      run(tiny_config(), bad, dir);
      FAIL("expected DivergenceError");
    } catch (const DivergenceError& e) {
      CHECK(fs::exists(e.dump_path));
      CHECK(file_bytes(e.dump_path).find("batch_indices") != std::string::npos);
    }
  }
}

TEST_CASE("behavior cloning collapses onto a single-action dataset") {
  env::OfflineDataset d = small_data();
  const env::Vec2 atom{0.6, -0.3};
  for (auto& t : d.transitions) t.action = atom;
  TrainConfig cfg = tiny_config();
  cfg.advantage.eta = 0.0;
  cfg.batch_size = 64;
  cfg.K_total = 2000;
  cfg.checkpoint_interval = 0;
  TrainState s = init_state(cfg, d);
  while (s.iteration < cfg.K_total) train_step(s, d);
  Matrix states(200, 2);
  Rng rng(1);
  for (std::size_t r = 0; r < 200; ++r) {
    const auto n = d.norm.normalize(d.transitions[rng.index(d.size())].state);
    states(r, 0) = n[0];
    states(r, 1) = n[1];
  }
  const Matrix a = ode::sample_actions_batch(s.actor, states, 5, Rng(2));
  double worst = 0.0;
  for (std::size_t r = 0; r < 200; ++r) worst = std::max(worst, std::hypot(a(r, 0) - atom[0], a(r, 1) - atom[1]));
  CHECK(worst <= 0.05);
}
