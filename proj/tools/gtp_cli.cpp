// gtp: dataset generation, training, evaluation and diagnostics.
//
// Exit codes: 0 success, 1 diagnostic reported FAIL, 2 usage or config
// error, 3 numeric divergence.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gtp/common/error.hpp"
#include "gtp/env/dataset.hpp"
#include "gtp/env/evaluate.hpp"
#include "gtp/losses/identity.hpp"
#include "gtp/ode/order_study.hpp"
#include "gtp/train/checkpoint.hpp"
#include "gtp/train/trainer.hpp"

namespace fs = std::filesystem;
using namespace gtp;

namespace {

constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitDiverged = 3;

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<double> parse_list(const std::string& s, const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    double v = 0.0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
      throw ConfigError(flag + ": invalid number '" + tok + "'");
    out.push_back(v);
  }
  return out;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ConfigError("cannot open '" + path.string() + "' for writing");
  return os;
}

int cmd_gen_data(const fs::path& out, std::size_t episodes, double noise, const std::string& mode,
                 std::size_t preferred, std::uint64_t seed) {
  env::MultiGoalEnvSpec spec;
  spec.reward_mode = env::parse_reward_mode(mode);
  spec.preferred_goal = preferred;
  const env::OfflineDataset data = env::gen_dataset(spec, episodes, noise, seed);
  env::write_dataset(out, data);
  std::cout << "transitions " << data.size() << "\nepisodes_per_goal";
  for (auto c : data.episodes_per_goal) std::cout << ' ' << c;
  std::cout << "\nwrote " << out.string() << '\n';
  return 0;
}

int cmd_train(const fs::path& config_path, const fs::path& data_path, const fs::path& out,
              std::optional<std::uint64_t> seed, std::optional<fs::path> resume,
              std::optional<std::int64_t> stop_at, bool quiet) {
  train::TrainConfig cfg = train::load_config(config_path);
  if (seed) cfg.seed = *seed;
  const env::OfflineDataset data = env::read_dataset(data_path);
  train::RunOptions opts;
  opts.resume = resume;
  opts.stop_at = stop_at;
  if (!quiet) opts.log = [](const std::string& s) { std::cout << s << std::endl; };
  try {
    const train::RunResult res = train::run(cfg, data, out, opts);
    std::cout << "final checkpoint " << res.final_checkpoint.string() << "\nmetrics " << res.metrics.string()
              << '\n';
  } catch (const train::DivergenceError& e) {
    std::cerr << "diverged: " << e.what() << "\ndiagnostic dump " << e.dump_path.string() << '\n';
    return kExitDiverged;
  }
  return 0;
}

int cmd_eval(const fs::path& ckpt, std::size_t episodes, std::size_t K, const fs::path& report_path,
             const std::optional<fs::path>& episodes_csv, std::uint64_t seed) {
  if (episodes == 0) throw ConfigError("--episodes must be >= 1");
  if (K == 0) throw ConfigError("--steps must be >= 1");
  const train::TrainState st = train::load_checkpoint(ckpt);
  const env::EvalReport rep =
      env::evaluate_actor(st.env, st.actor, st.norm, episodes, K, Rng(seed).split(stream::eval));
  nlohmann::ordered_json j;
  j["checkpoint"] = ckpt.string();
  j["iteration"] = st.iteration;
  j["episodes"] = episodes;
  j["steps"] = K;
  j["seed"] = seed;
  j["mean_return"] = rep.mean_return;
  j["goal_hit_rate"] = rep.goal_hit_rate;
  j["per_goal_share"] = rep.per_goal_share;
  auto os = open_out(report_path);
  os << j.dump(2) << '\n';
  if (episodes_csv) {
    auto cs = open_out(*episodes_csv);
    cs << "episode,return,goal,steps\n";
    for (const auto& e : rep.episodes) cs << e.episode << ',' << fmt(e.ret) << ',' << e.goal << ',' << e.steps << '\n';
  }
  std::cout << "mean_return " << fmt(rep.mean_return) << "\ngoal_hit_rate " << fmt(rep.goal_hit_rate)
            << "\nper_goal_share";
  for (double s : rep.per_goal_share) std::cout << ' ' << fmt(s);
  std::cout << '\n';
  return 0;
}

int cmd_sample(const fs::path& ckpt, std::size_t n, std::size_t K, const std::string& state_str,
               const fs::path& out, std::uint64_t seed) {
  if (n == 0) throw ConfigError("--n must be >= 1");
  if (K == 0) throw ConfigError("--steps must be >= 1");
  const auto sv = parse_list(state_str, "--state");
  if (sv.size() != 2) throw ConfigError("--state needs two comma-separated values");
  const train::TrainState st = train::load_checkpoint(ckpt);
  const env::Vec2 s = st.norm.normalize({sv[0], sv[1]});
  Matrix states(n, 2);
  for (std::size_t r = 0; r < n; ++r) {
    states(r, 0) = s[0];
    states(r, 1) = s[1];
  }
  const Matrix a = ode::sample_actions_batch(st.actor, states, K, Rng(seed).split(stream::sample));
  auto os = open_out(out);
  os << "sample,ax,ay\n";
  for (std::size_t r = 0; r < n; ++r) os << r << ',' << fmt(a(r, 0)) << ',' << fmt(a(r, 1)) << '\n';
  std::cout << "wrote " << n << " samples to " << out.string() << '\n';
  return 0;
}

int cmd_diag_order(const std::string& scheme, const std::string& h_list, std::size_t mc,
                   const std::string& atoms, const std::string& weights, const fs::path& out,
                   std::uint64_t seed) {
  ode::OrderStudyConfig cfg;
  cfg.scheme = ode::parse_scheme(scheme);
  cfg.h_list = parse_list(h_list, "--h-list");
  cfg.mc_samples = mc;
  cfg.seed = seed;
  if (!atoms.empty()) cfg.atoms = parse_list(atoms, "--atoms");
  if (!weights.empty()) {
    cfg.weights = parse_list(weights, "--weights");
  } else {
    cfg.weights.assign(cfg.atoms.size(), 1.0 / static_cast<double>(cfg.atoms.size()));
  }
  if (cfg.h_list.size() < 3) throw ConfigError("--h-list needs at least 3 values");
  for (double h : cfg.h_list)
    if (!(h > 0.0 && h <= cfg.t - cfg.u))
      throw ConfigError("--h-list values must lie in (0, " + fmt(cfg.t - cfg.u) + "]");
  if (mc == 0) throw ConfigError("--mc-samples must be >= 1");
  const ode::OrderStudy st = ode::run_order_study(cfg);
  auto os = open_out(out);
  os << "h,gap,scheme,l_prac,l_ideal,solver_error\n";
  for (const auto& r : st.rows)
    os << fmt(r.h) << ',' << fmt(r.gap) << ',' << scheme << ',' << fmt(r.l_prac) << ',' << fmt(r.l_ideal) << ','
       << fmt(r.solver_error) << '\n';
  std::cout << "scheme " << scheme << " (order " << ode::order(cfg.scheme) << ")\n"
            << "gap_slope " << fmt(st.gap_slope) << "\nsolver_error_slope " << fmt(st.solver_error_slope) << '\n';
  return 0;
}

int cmd_diag_identity(const std::string& which, std::size_t samples, bool corrupt, std::uint64_t seed) {
  if (samples == 0) throw ConfigError("--samples must be >= 1");
  losses::PhiFn phi;
  if (which == "constant") {
    phi = losses::constant_field_phi({0.7, -1.3});
  } else if (which == "linear") {
    phi = losses::linear_field_phi();
  } else {
    throw ConfigError("--case must be constant or linear");
  }
  if (corrupt) phi = losses::corrupted_phi(phi);
  Rng rng = Rng(seed).split(stream::diag);
  const losses::IdentityCheck chk = losses::check_identity(phi, 2, samples, rng);
  std::cout << "case " << which << (corrupt ? " (corrupted)" : "") << "\nsamples " << samples
            << "\nmax_residual " << fmt(chk.max_residual) << '\n'
            << (chk.pass ? "PASS" : "FAIL") << '\n';
  return chk.pass ? 0 : kExitFail;
}

int cmd_export(const fs::path& ckpt, std::size_t n, std::size_t K, const fs::path& out, std::uint64_t seed) {
  if (n == 0) throw ConfigError("--n must be >= 1");
  if (K == 0) throw ConfigError("--steps must be >= 1");
  const train::TrainState st = train::load_checkpoint(ckpt);
  const env::Policy policy = env::actor_policy(st.actor, st.norm, K);
  const Rng base = Rng(seed).split(stream::eval);
  auto os = open_out(out);
  os << "episode,step,x,y,ax,ay\n";
  for (std::size_t e = 0; e < n; ++e) {
    Rng rng = base.split(e);
    for (const auto& s : env::rollout(st.env, policy, rng))
      os << e << ',' << s.step << ',' << fmt(s.state[0]) << ',' << fmt(s.state[1]) << ',' << fmt(s.action[0])
         << ',' << fmt(s.action[1]) << '\n';
  }
  std::cout << "wrote " << n << " episodes to " << out.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generative trajectory policies on a 2-D multi-goal task"};
  app.require_subcommand(1);
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> train_seed;

  auto* gen = app.add_subcommand("gen-data", "Generate a scripted offline dataset");
  std::string gen_out, gen_mode = "uniform";
  std::size_t gen_episodes = 400, gen_preferred = 0;
  double gen_noise = 0.1;
  gen->add_option("--out", gen_out, "Dataset file")->required();
  gen->add_option("--episodes", gen_episodes, "Number of episodes (>= number of goals)")->capture_default_str();
  gen->add_option("--noise", gen_noise, "Behavior noise scale")->capture_default_str();
  gen->add_option("--reward-mode", gen_mode, "uniform or preferred")->capture_default_str();
  gen->add_option("--preferred-goal", gen_preferred, "Goal index rewarded 1 in preferred mode")->capture_default_str();
  gen->add_option("--seed", seed, "Master seed")->capture_default_str();

  auto* tr = app.add_subcommand("train", "Train an actor and critics");
  std::string tr_config, tr_data, tr_out;
  std::optional<std::string> tr_resume;
  std::optional<std::int64_t> tr_stop;
  bool tr_quiet = false;
  tr->add_option("--config", tr_config, "key = value config file")->required();
  tr->add_option("--data", tr_data, "Dataset file")->required();
  tr->add_option("--out", tr_out, "Output directory")->required();
  tr->add_option("--seed", train_seed, "Overrides the config seed");
  tr->add_option("--resume", tr_resume, "Checkpoint to continue from");
  tr->add_option("--stop-at", tr_stop, "Stop (with a checkpoint) at this iteration");
  tr->add_flag("--quiet", tr_quiet, "No progress output");

  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint in the environment");
  std::string ev_ckpt, ev_out = "eval_report.json";
  std::optional<std::string> ev_csv;
  std::size_t ev_episodes = 100, ev_steps = 5;
  ev->add_option("--checkpoint", ev_ckpt, "Checkpoint file")->required();
  ev->add_option("--episodes", ev_episodes, "Episodes")->capture_default_str();
  ev->add_option("--steps", ev_steps, "Sampler steps K")->capture_default_str();
  ev->add_option("--out", ev_out, "JSON report")->capture_default_str();
  ev->add_option("--episodes-csv", ev_csv, "Per-episode log");
  ev->add_option("--seed", seed, "Master seed")->capture_default_str();

  auto* sa = app.add_subcommand("sample", "Sample actions at one state");
  std::string sa_ckpt, sa_out = "samples.csv", sa_state = "0,0";
  std::size_t sa_n = 1000, sa_steps = 5;
  sa->add_option("--checkpoint", sa_ckpt, "Checkpoint file")->required();
  sa->add_option("--n", sa_n, "Number of samples")->capture_default_str();
  sa->add_option("--steps", sa_steps, "Sampler steps K")->capture_default_str();
  sa->add_option("--state", sa_state, "Raw state x,y")->capture_default_str();
  sa->add_option("--out", sa_out, "CSV output")->capture_default_str();
  sa->add_option("--seed", seed, "Master seed")->capture_default_str();

  auto* dord = app.add_subcommand("diag-order", "Surrogate vs posterior target gap against solver step");
  std::string do_scheme = "euler", do_h = "0.2,0.1,0.05,0.025", do_out = "order.csv", do_atoms, do_weights;
  std::size_t do_mc = 100000;
  dord->add_option("--scheme", do_scheme, "euler or heun")->capture_default_str();
  dord->add_option("--h-list", do_h, "Comma-separated step sizes")->capture_default_str();
  dord->add_option("--mc-samples", do_mc, "Monte-Carlo samples")->capture_default_str();
  dord->add_option("--atoms", do_atoms, "Comma-separated 1-D data atoms (default -1,1)");
  dord->add_option("--weights", do_weights, "Atom weights (default uniform)");
  dord->add_option("--out", do_out, "CSV output")->capture_default_str();
  dord->add_option("--seed", seed, "Master seed")->capture_default_str();

  auto* did = app.add_subcommand("diag-identity", "Check the flow-map identity on analytic fields");
  std::string di_case = "constant";
  std::size_t di_samples = 1000;
  bool di_corrupt = false;
  did->add_option("--case", di_case, "constant or linear")->capture_default_str();
  did->add_option("--samples", di_samples, "Random (x, t, s) points")->capture_default_str();
  did->add_flag("--corrupt", di_corrupt, "Negative control: perturb the closed form");
  did->add_option("--seed", seed, "Master seed")->capture_default_str();

  auto* ex = app.add_subcommand("export-trajectories", "Roll out a checkpoint and write every step");
  std::string ex_ckpt, ex_out = "trajectories.csv";
  std::size_t ex_n = 20, ex_steps = 5;
  ex->add_option("--checkpoint", ex_ckpt, "Checkpoint file")->required();
  ex->add_option("--n", ex_n, "Episodes")->capture_default_str();
  ex->add_option("--steps", ex_steps, "Sampler steps K")->capture_default_str();
  ex->add_option("--out", ex_out, "CSV output")->capture_default_str();
  ex->add_option("--seed", seed, "Master seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*gen) {
      if (gen_episodes == 0) throw ConfigError("--episodes must be >= 1");
      return cmd_gen_data(gen_out, gen_episodes, gen_noise, gen_mode, gen_preferred, seed);
    }
    if (*tr) {
      std::optional<fs::path> resume;
      if (tr_resume) resume = fs::path(*tr_resume);
      return cmd_train(tr_config, tr_data, tr_out, train_seed, resume, tr_stop, tr_quiet);
    }
    if (*ev) return cmd_eval(ev_ckpt, ev_episodes, ev_steps, ev_out, ev_csv ? std::optional<fs::path>(*ev_csv) : std::nullopt, seed);
    if (*sa) return cmd_sample(sa_ckpt, sa_n, sa_steps, sa_state, sa_out, seed);
    if (*dord) return cmd_diag_order(do_scheme, do_h, do_mc, do_atoms, do_weights, do_out, seed);
    if (*did) return cmd_diag_identity(di_case, di_samples, di_corrupt, seed);
    if (*ex) return cmd_export(ex_ckpt, ex_n, ex_steps, ex_out, seed);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitDiverged;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
