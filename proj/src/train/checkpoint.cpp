#include "gtp/train/checkpoint.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "gtp/common/error.hpp"
#include "gtp/nn/serialize.hpp"

namespace gtp::train {

namespace {

constexpr std::array<char, 8> kMagic{'G', 'T', 'P', 'C', 'K', 'P', 'T', '\0'};

using namespace nn::io;

void write_string(std::ostream& os, const std::string& s) {
  write_u64(os, s.size());
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& is) {
  const auto n = read_u64(is);
  if (n > (1u << 20)) throw ParseError("checkpoint: implausible config length");
  std::string s(n, '\0');
  is.read(s.data(), static_cast<std::streamsize>(n));
  if (static_cast<std::uint64_t>(is.gcount()) != n) throw ParseError("checkpoint: truncated config");
  return s;
}

}  // namespace

void write_checkpoint(std::ostream& os, const TrainState& s) {
  os.write(kMagic.data(), kMagic.size());
  write_u32(os, kCheckpointVersion);
  write_string(os, to_text(s.config));
  write_u64(os, static_cast<std::uint64_t>(s.iteration));
  write_u64(os, s.rng.key());
  write_u64(os, s.rng.counter());

  write_u64(os, s.env.goals.size());
  for (const auto& g : s.env.goals) {
    write_f64(os, g[0]);
    write_f64(os, g[1]);
  }
  write_f64(os, s.env.step_scale);
  write_u64(os, s.env.horizon);
  write_f64(os, s.env.goal_radius);
  write_u32(os, s.env.reward_mode == env::RewardMode::uniform ? 0 : 1);
  write_u64(os, s.env.preferred_goal);
  write_f64(os, s.env.other_goal_reward);
  write_f64(os, s.env.start_half_width);
  for (int k = 0; k < 2; ++k) write_f64(os, s.norm.mean[k]);
  for (int k = 0; k < 2; ++k) write_f64(os, s.norm.std[k]);

  const auto& a = s.actor;
  write_u64(os, a.state_dim);
  write_u64(os, a.action_dim);
  write_f64(os, a.time.T);
  write_f64(os, a.time.t_min);
  write_f64(os, a.time.rho);
  write_f64(os, a.sigma_data);
  write_f64(os, a.skip_sigma);
  write_f64(os, a.action_bound);
  nn::write_params(os, a.spec, a.online);
  nn::write_params(os, a.spec, a.ema);

  for (const auto& p : s.critic.online) nn::write_params(os, s.critic.spec, p);
  for (const auto& p : s.critic.target) nn::write_params(os, s.critic.spec, p);

  nn::write_adam(os, s.adam_actor);
  nn::write_adam(os, s.adam_critic[0]);
  nn::write_adam(os, s.adam_critic[1]);
}

TrainState read_checkpoint(std::istream& is) {
  std::array<char, 8> magic{};
  is.read(magic.data(), magic.size());
  if (is.gcount() != static_cast<std::streamsize>(magic.size()) || magic != kMagic)
    throw ParseError("not a checkpoint file (bad magic)");
  const auto version = read_u32(is);
  if (version != kCheckpointVersion)
    throw ParseError("checkpoint format version " + std::to_string(version) + " is not supported (expected " +
                     std::to_string(kCheckpointVersion) + ")");
  TrainState s;
  try {
    s.config = parse_config(read_string(is));
  } catch (const ConfigError& e) {
    throw ParseError(std::string("checkpoint config: ") + e.what());
  }
  s.iteration = static_cast<std::int64_t>(read_u64(is));
  const auto key = read_u64(is);
  const auto counter = read_u64(is);
  s.rng = Rng::from_state(key, counter);

  const auto n_goals = read_u64(is);
  if (n_goals == 0 || n_goals > 1024) throw ParseError("checkpoint: implausible goal count");
  s.env.goals.resize(n_goals);
  for (auto& g : s.env.goals) {
    g[0] = read_f64(is);
    g[1] = read_f64(is);
  }
  s.env.step_scale = read_f64(is);
  s.env.horizon = read_u64(is);
  s.env.goal_radius = read_f64(is);
  const auto mode = read_u32(is);
  if (mode > 1) throw ParseError("checkpoint: bad reward mode");
  s.env.reward_mode = mode == 0 ? env::RewardMode::uniform : env::RewardMode::preferred;
  s.env.preferred_goal = read_u64(is);
  s.env.other_goal_reward = read_f64(is);
  s.env.start_half_width = read_f64(is);
  for (int k = 0; k < 2; ++k) s.norm.mean[k] = read_f64(is);
  for (int k = 0; k < 2; ++k) s.norm.std[k] = read_f64(is);

  auto& a = s.actor;
  a.state_dim = read_u64(is);
  a.action_dim = read_u64(is);
  a.time.T = read_f64(is);
  a.time.t_min = read_f64(is);
  a.time.rho = read_f64(is);
  a.sigma_data = read_f64(is);
  a.skip_sigma = read_f64(is);
  a.action_bound = read_f64(is);
  {
    nn::Network online = nn::read_network(is);
    a.spec = online.spec;
    a.online = std::move(online.params);
    a.ema = nn::read_params(is, a.spec);
  }

  {
    nn::Network first = nn::read_network(is);
    s.critic.spec = first.spec;
    s.critic.online[0] = std::move(first.params);
    s.critic.online[1] = nn::read_params(is, s.critic.spec);
    s.critic.target[0] = nn::read_params(is, s.critic.spec);
    s.critic.target[1] = nn::read_params(is, s.critic.spec);
  }

  s.adam_actor = nn::read_adam(is);
  s.adam_critic[0] = nn::read_adam(is);
  s.adam_critic[1] = nn::read_adam(is);
  if (is.peek() != std::char_traits<char>::eof()) throw ParseError("checkpoint: trailing bytes");
  return s;
}

void save_checkpoint(const std::filesystem::path& path, const TrainState& state) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw ConfigError("cannot open '" + tmp.string() + "' for writing");
    write_checkpoint(os, state);
    os.flush();
    if (!os) throw ConfigError("failed writing '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

TrainState load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open checkpoint '" + path.string() + "'");
  return read_checkpoint(is);
}

}  // namespace gtp::train
