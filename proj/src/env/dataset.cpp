#include "gtp/env/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "gtp/common/error.hpp"

namespace gtp::env {

namespace {

constexpr const char* kMagic = "gtp-dataset 1";

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_real(std::string_view tok, std::size_t line) {
  double v = 0.0;
  const auto t = trim(tok);
  auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc{} || res.ptr != t.data() + t.size() || t.empty())
    throw ParseError("line " + std::to_string(line) + ": expected a number, got '" + t + "'");
  return v;
}

std::uint64_t parse_uint(std::string_view tok, std::size_t line) {
  std::uint64_t v = 0;
  const auto t = trim(tok);
  auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc{} || res.ptr != t.data() + t.size() || t.empty())
    throw ParseError("line " + std::to_string(line) + ": expected an integer, got '" + t + "'");
  return v;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<double> parse_reals(const std::string& v, std::size_t line) {
  std::vector<double> out;
  std::istringstream is(v);
  std::string tok;
  while (is >> tok) out.push_back(parse_real(tok, line));
  return out;
}

}  // namespace

Vec2 Normalization::normalize(const Vec2& s) const {
  return {(s[0] - mean[0]) / std[0], (s[1] - mean[1]) / std[1]};
}

Vec2 Normalization::denormalize(const Vec2& s) const {
  return {s[0] * std[0] + mean[0], s[1] * std[1] + mean[1]};
}

Normalization compute_normalization(const std::vector<Transition>& transitions) {
  Normalization n;
  if (transitions.empty()) return n;
  const auto count = static_cast<double>(transitions.size());
  for (int k = 0; k < 2; ++k) {
    double m = 0.0;
    for (const auto& tr : transitions) m += tr.state[k];
    m /= count;
    double var = 0.0;
    for (const auto& tr : transitions) var += (tr.state[k] - m) * (tr.state[k] - m);
    n.mean[k] = m;
    n.std[k] = std::max(std::sqrt(var / count), 1e-6);
  }
  return n;
}

OfflineDataset gen_dataset(const MultiGoalEnvSpec& spec, std::size_t n_episodes, double behavior_noise,
                           std::uint64_t seed) {
  spec.validate();
  if (n_episodes < spec.goals.size())
    throw ConfigError("gen_dataset: need at least one episode per goal");
  if (!(behavior_noise >= 0.0)) throw ConfigError("gen_dataset: behavior_noise must be >= 0");
  OfflineDataset data;
  data.env = spec;
  data.seed = seed;
  data.behavior_noise = behavior_noise;
  data.episodes_per_goal.assign(spec.goals.size(), 0);
  const Rng root = Rng(seed).split(stream::data);
  for (std::size_t e = 0; e < n_episodes; ++e) {
    Rng rng = root.split(e);
    const std::size_t goal = e % spec.goals.size();
    data.episodes_per_goal[goal] += 1;
    Vec2 s = sample_start(spec, rng);
    for (std::size_t step = 0; step < spec.horizon; ++step) {
      const Vec2 dir = direction_to_goal(spec, s, goal);
      Vec2 a{};
      for (int k = 0; k < 2; ++k) a[k] = std::clamp(dir[k] + behavior_noise * rng.normal(), -1.0, 1.0);
      const StepResult r = env_step(spec, s, a);
      data.transitions.push_back({s, a, r.reward, r.next_state, r.terminal});
      s = r.next_state;
      if (r.terminal) break;
    }
  }
  data.norm = compute_normalization(data.transitions);
  return data;
}

Batch sample_batch(const OfflineDataset& data, std::size_t batch_size, Rng& rng) {
  if (data.transitions.empty()) throw ConfigError("sample_batch: empty dataset");
  if (batch_size == 0) throw ConfigError("sample_batch: batch_size must be >= 1");
  Batch b;
  b.states = Matrix(batch_size, 2);
  b.actions = Matrix(batch_size, 2);
  b.next_states = Matrix(batch_size, 2);
  b.rewards.resize(batch_size);
  b.terminals.resize(batch_size);
  b.indices.resize(batch_size);
  for (std::size_t r = 0; r < batch_size; ++r) {
    const std::size_t i = rng.index(data.transitions.size());
    const Transition& tr = data.transitions[i];
    const Vec2 s = data.norm.normalize(tr.state);
    const Vec2 ns = data.norm.normalize(tr.next_state);
    for (int k = 0; k < 2; ++k) {
      b.states(r, k) = s[k];
      b.actions(r, k) = tr.action[k];
      b.next_states(r, k) = ns[k];
    }
    b.rewards[r] = tr.reward;
    b.terminals[r] = tr.terminal ? 1 : 0;
    b.indices[r] = i;
  }
  return b;
}

void write_dataset(std::ostream& os, const OfflineDataset& d) {
  os << kMagic << '\n';
  os << "goals =";
  for (const auto& g : d.env.goals) os << ' ' << fmt(g[0]) << ' ' << fmt(g[1]);
  os << '\n';
  os << "step_scale = " << fmt(d.env.step_scale) << '\n';
  os << "horizon = " << d.env.horizon << '\n';
  os << "goal_radius = " << fmt(d.env.goal_radius) << '\n';
  os << "reward_mode = " << to_string(d.env.reward_mode) << '\n';
  os << "preferred_goal = " << d.env.preferred_goal << '\n';
  os << "other_goal_reward = " << fmt(d.env.other_goal_reward) << '\n';
  os << "start_half_width = " << fmt(d.env.start_half_width) << '\n';
  os << "seed = " << d.seed << '\n';
  os << "behavior_noise = " << fmt(d.behavior_noise) << '\n';
  os << "episodes_per_goal =";
  for (auto c : d.episodes_per_goal) os << ' ' << c;
  os << '\n';
  os << "state_mean = " << fmt(d.norm.mean[0]) << ' ' << fmt(d.norm.mean[1]) << '\n';
  os << "state_std = " << fmt(d.norm.std[0]) << ' ' << fmt(d.norm.std[1]) << '\n';
  os << "transitions = " << d.transitions.size() << '\n';
  for (const auto& t : d.transitions) {
    os << fmt(t.state[0]) << ',' << fmt(t.state[1]) << ',' << fmt(t.action[0]) << ',' << fmt(t.action[1])
       << ',' << fmt(t.reward) << ',' << fmt(t.next_state[0]) << ',' << fmt(t.next_state[1]) << ','
       << (t.terminal ? 1 : 0) << '\n';
  }
}

void write_dataset(const std::filesystem::path& path, const OfflineDataset& data) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ConfigError("cannot open '" + path.string() + "' for writing");
  write_dataset(os, data);
  os.flush();
  if (!os) throw ConfigError("failed writing '" + path.string() + "'");
}

OfflineDataset read_dataset(std::istream& is) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(is, line)) throw ParseError("line 1: empty dataset file");
  ++lineno;
  if (trim(line) != kMagic) throw ParseError("line 1: missing '" + std::string(kMagic) + "' header");

  std::map<std::string, std::pair<std::string, std::size_t>> header;
  std::size_t n_transitions = 0;
  while (true) {
    if (!std::getline(is, line)) throw ParseError("line " + std::to_string(lineno + 1) + ": header ended before 'transitions'");
    ++lineno;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string val = trim(std::string_view(line).substr(eq + 1));
    if (key == "transitions") {
      n_transitions = parse_uint(val, lineno);
      break;
    }
    header[key] = {val, lineno};
  }

  auto field = [&](const std::string& key) -> const std::pair<std::string, std::size_t>& {
    auto it = header.find(key);
    if (it == header.end()) throw ParseError("dataset header is missing '" + key + "'");
    return it->second;
  };

  OfflineDataset d;
  {
    const auto& [v, ln] = field("goals");
    const auto g = parse_reals(v, ln);
    if (g.empty() || g.size() % 2 != 0) throw ParseError("line " + std::to_string(ln) + ": goals need x y pairs");
    d.env.goals.clear();
    for (std::size_t i = 0; i < g.size(); i += 2) d.env.goals.push_back({g[i], g[i + 1]});
  }
  d.env.step_scale = parse_real(field("step_scale").first, field("step_scale").second);
  d.env.horizon = parse_uint(field("horizon").first, field("horizon").second);
  d.env.goal_radius = parse_real(field("goal_radius").first, field("goal_radius").second);
  try {
    d.env.reward_mode = parse_reward_mode(field("reward_mode").first);
  } catch (const ConfigError& e) {
    throw ParseError("line " + std::to_string(field("reward_mode").second) + ": " + e.what());
  }
  d.env.preferred_goal = parse_uint(field("preferred_goal").first, field("preferred_goal").second);
  d.env.other_goal_reward = parse_real(field("other_goal_reward").first, field("other_goal_reward").second);
  d.env.start_half_width = parse_real(field("start_half_width").first, field("start_half_width").second);
  d.seed = parse_uint(field("seed").first, field("seed").second);
  d.behavior_noise = parse_real(field("behavior_noise").first, field("behavior_noise").second);
  {
    const auto& [v, ln] = field("episodes_per_goal");
    std::istringstream ss(v);
    std::string tok;
    while (ss >> tok) d.episodes_per_goal.push_back(parse_uint(tok, ln));
  }
  {
    const auto& [v, ln] = field("state_mean");
    const auto m = parse_reals(v, ln);
    if (m.size() != 2) throw ParseError("line " + std::to_string(ln) + ": state_mean needs 2 values");
    d.norm.mean = {m[0], m[1]};
  }
  {
    const auto& [v, ln] = field("state_std");
    const auto s = parse_reals(v, ln);
    if (s.size() != 2) throw ParseError("line " + std::to_string(ln) + ": state_std needs 2 values");
    d.norm.std = {s[0], s[1]};
  }
  try {
    d.env.validate();
  } catch (const ConfigError& e) {
    throw ParseError(std::string("dataset environment invalid: ") + e.what());
  }

  if (n_transitions == 0) throw ParseError("dataset has no transitions");
  d.transitions.reserve(n_transitions);
  for (std::size_t rec = 0; rec < n_transitions; ++rec) {
    if (!std::getline(is, line))
      throw ParseError("line " + std::to_string(lineno + 1) + ": expected " + std::to_string(n_transitions) +
                       " transitions, found " + std::to_string(rec));
    ++lineno;
    const auto parts = split(line, ',');
    if (parts.size() != 8)
      throw ParseError("line " + std::to_string(lineno) + ": expected 8 comma-separated fields, got " +
                       std::to_string(parts.size()));
    Transition t{};
    t.state = {parse_real(parts[0], lineno), parse_real(parts[1], lineno)};
    t.action = {parse_real(parts[2], lineno), parse_real(parts[3], lineno)};
    t.reward = parse_real(parts[4], lineno);
    t.next_state = {parse_real(parts[5], lineno), parse_real(parts[6], lineno)};
    const auto term = parse_uint(parts[7], lineno);
    if (term > 1) throw ParseError("line " + std::to_string(lineno) + ": terminal must be 0 or 1");
    t.terminal = term == 1;
    for (double a : t.action)
      if (!(a >= -1.0 && a <= 1.0))
        throw ParseError("record " + std::to_string(rec) + " (line " + std::to_string(lineno) +
                         "): action outside [-1, 1]");
    d.transitions.push_back(t);
  }
  while (std::getline(is, line)) {
    ++lineno;
    if (!trim(line).empty()) throw ParseError("line " + std::to_string(lineno) + ": unexpected trailing data");
  }

  const Normalization check = compute_normalization(d.transitions);
  for (int k = 0; k < 2; ++k)
    if (std::abs(check.mean[k] - d.norm.mean[k]) > 1e-10 || std::abs(check.std[k] - d.norm.std[k]) > 1e-10)
      throw ParseError("stored normalization statistics do not match the transitions");
  return d;
}

OfflineDataset read_dataset(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open dataset '" + path.string() + "'");
  return read_dataset(is);
}

}  // namespace gtp::env
