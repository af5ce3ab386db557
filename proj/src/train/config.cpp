#include "gtp/train/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

#include "gtp/common/error.hpp"

namespace gtp::train {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <class T>
T parse_number(const std::string& v) {
  T out{};
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || res.ec != std::errc{} || res.ptr != v.data() + v.size())
    throw ConfigError("invalid number '" + v + "'");
  return out;
}

std::vector<std::size_t> parse_dims(const std::string& v) {
  std::vector<std::size_t> dims;
  std::stringstream ss(v);
  std::string tok;
  while (std::getline(ss, tok, ',')) dims.push_back(parse_number<std::size_t>(trim(tok)));
  return dims;
}

std::string fmt_dims(const std::vector<std::size_t>& d) {
  std::string s;
  for (std::size_t i = 0; i < d.size(); ++i) s += (i ? "," : "") + std::to_string(d[i]);
  return s;
}

struct Field {
  std::function<void(TrainConfig&, const std::string&)> set;
  std::function<std::string(const TrainConfig&)> get;
};

template <class T, class M>
Field num(M member) {
  return {[member](TrainConfig& c, const std::string& v) { std::invoke(member, c) = parse_number<T>(v); },
          [member](const TrainConfig& c) {
            if constexpr (std::is_floating_point_v<T>) return fmt(std::invoke(member, c));
            else return std::to_string(std::invoke(member, c));
          }};
}

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> f = {
      {"lr_actor", num<double>(&TrainConfig::lr_actor)},
      {"lr_critic", num<double>(&TrainConfig::lr_critic)},
      {"lr_decay", {[](TrainConfig& c, const std::string& v) { c.lr_decay = parse_lr_decay(v); },
                    [](const TrainConfig& c) { return to_string(c.lr_decay); }}},
      {"eta", {[](TrainConfig& c, const std::string& v) { c.advantage.eta = parse_number<double>(v); },
               [](const TrainConfig& c) { return fmt(c.advantage.eta); }}},
      {"lambda_flow", num<double>(&TrainConfig::lambda_flow)},
      {"gamma", num<double>(&TrainConfig::gamma)},
      {"ema_rate", num<double>(&TrainConfig::ema_rate)},
      {"grad_norm_max", num<double>(&TrainConfig::grad_norm_max)},
      {"batch_size", num<std::size_t>(&TrainConfig::batch_size)},
      {"K_total", num<std::int64_t>(&TrainConfig::K_total)},
      {"T", {[](TrainConfig& c, const std::string& v) { c.time.T = parse_number<double>(v); },
             [](const TrainConfig& c) { return fmt(c.time.T); }}},
      {"t_min", {[](TrainConfig& c, const std::string& v) { c.time.t_min = parse_number<double>(v); },
                 [](const TrainConfig& c) { return fmt(c.time.t_min); }}},
      {"rho", {[](TrainConfig& c, const std::string& v) { c.time.rho = parse_number<double>(v); },
               [](const TrainConfig& c) { return fmt(c.time.rho); }}},
      {"s0", num<std::int64_t>(&TrainConfig::s0)},
      {"s1", num<std::int64_t>(&TrainConfig::s1)},
      {"seed", num<std::uint64_t>(&TrainConfig::seed)},
      {"n_sample_steps_eval", num<std::size_t>(&TrainConfig::n_sample_steps_eval)},
      {"n_sample_steps_target", num<std::size_t>(&TrainConfig::n_sample_steps_target)},
      {"weight_cap", {[](TrainConfig& c, const std::string& v) { c.advantage.weight_cap = parse_number<double>(v); },
                      [](const TrainConfig& c) { return fmt(c.advantage.weight_cap); }}},
      {"advantage_eps", {[](TrainConfig& c, const std::string& v) { c.advantage.eps = parse_number<double>(v); },
                         [](const TrainConfig& c) { return fmt(c.advantage.eps); }}},
      {"n_value_samples",
       {[](TrainConfig& c, const std::string& v) { c.advantage.n_value_samples = parse_number<std::size_t>(v); },
        [](const TrainConfig& c) { return std::to_string(c.advantage.n_value_samples); }}},
      {"ablation", {[](TrainConfig& c, const std::string& v) { c.ablation = parse_ablation(v); },
                    [](const TrainConfig& c) { return to_string(c.ablation); }}},
      {"lambda_q", num<double>(&TrainConfig::lambda_q)},
      {"actor_hidden", {[](TrainConfig& c, const std::string& v) { c.actor.hidden = parse_dims(v); },
                        [](const TrainConfig& c) { return fmt_dims(c.actor.hidden); }}},
      {"actor_activation",
       {[](TrainConfig& c, const std::string& v) { c.actor.activation = nn::parse_activation(v); },
        [](const TrainConfig& c) { return nn::to_string(c.actor.activation); }}},
      {"skip_sigma",
       {[](TrainConfig& c, const std::string& v) { c.actor.skip_sigma = parse_number<double>(v); },
        [](const TrainConfig& c) { return fmt(c.actor.skip_sigma); }}},
      {"time_embed_dim",
       {[](TrainConfig& c, const std::string& v) { c.actor.time_embed_dim = parse_number<std::size_t>(v); },
        [](const TrainConfig& c) { return std::to_string(c.actor.time_embed_dim); }}},
      {"critic_hidden", {[](TrainConfig& c, const std::string& v) { c.critic_hidden = parse_dims(v); },
                         [](const TrainConfig& c) { return fmt_dims(c.critic_hidden); }}},
      {"critic_activation",
       {[](TrainConfig& c, const std::string& v) { c.critic_activation = nn::parse_activation(v); },
        [](const TrainConfig& c) { return nn::to_string(c.critic_activation); }}},
      {"eval_interval", num<std::int64_t>(&TrainConfig::eval_interval)},
      {"eval_episodes", num<std::size_t>(&TrainConfig::eval_episodes)},
      {"checkpoint_interval", num<std::int64_t>(&TrainConfig::checkpoint_interval)},
  };
  return f;
}

}  // namespace

std::string to_string(LrDecay d) { return d == LrDecay::none ? "none" : "cosine"; }

LrDecay parse_lr_decay(std::string_view name) {
  if (name == "none") return LrDecay::none;
  if (name == "cosine") return LrDecay::cosine;
  throw ConfigError("unknown lr_decay '" + std::string(name) + "' (expected none or cosine)");
}

double TrainConfig::lr_factor(std::int64_t k) const {
  if (lr_decay == LrDecay::none || K_total <= 0) return 1.0;
  return 0.5 * (1.0 + std::cos(std::numbers::pi * static_cast<double>(k) / static_cast<double>(K_total)));
}

std::string to_string(Ablation a) { return a == Ablation::none ? "none" : "linear_q"; }

Ablation parse_ablation(std::string_view name) {
  if (name == "none") return Ablation::none;
  if (name == "linear_q") return Ablation::linear_q;
  throw ConfigError("unknown ablation '" + std::string(name) + "' (expected none or linear_q)");
}

void TrainConfig::validate() const {
  auto need = [](bool ok, const char* msg) {
    if (!ok) throw ConfigError(msg);
  };
  need(lr_actor > 0.0 && lr_critic > 0.0, "config: learning rates must be > 0");
  need(lambda_flow >= 0.0, "config: lambda_flow must be >= 0");
  need(gamma >= 0.0 && gamma <= 1.0, "config: gamma must be in [0, 1]");
  need(ema_rate > 0.0 && ema_rate <= 1.0, "config: ema_rate must be in (0, 1]");
  need(grad_norm_max > 0.0, "config: grad_norm_max must be > 0");
  need(batch_size >= 1, "config: batch_size must be >= 1");
  need(K_total >= 0, "config: K_total must be >= 0");
  need(time.t_min > 0.0 && time.T > time.t_min, "config: need 0 < t_min < T");
  need(time.rho > 0.0, "config: rho must be > 0");
  need(n_sample_steps_eval >= 1 && n_sample_steps_target >= 1, "config: sampler steps must be >= 1");
  need(lambda_q >= 0.0, "config: lambda_q must be >= 0");
  need(eval_interval >= 0 && checkpoint_interval >= 0, "config: intervals must be >= 0");
  need(eval_interval == 0 || eval_episodes >= 1, "config: eval_episodes must be >= 1");
  need(!actor.hidden.empty() && !critic_hidden.empty(), "config: hidden layer lists must be non-empty");
  need(actor.skip_sigma >= 0.0, "config: skip_sigma must be >= 0");
  need(actor.time_embed_dim >= 2 && actor.time_embed_dim % 2 == 0,
       "config: time_embed_dim must be even and >= 2");
  advantage.validate();
  if (K_total > 0) {
    schedule().validate();
  } else {
    // Checks s0 and s1 only; any K_total long enough for the phases will do.
    losses::ScheduleSpec probe{s0, s1, 1 << 20};
    probe.validate();
  }
}

TrainConfig parse_config(std::string_view text) {
  TrainConfig cfg;
  std::map<std::string, const Field*> index;
  for (const auto& [k, f] : fields()) index[k] = &f;
  std::istringstream is{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string val = trim(std::string_view(t).substr(eq + 1));
    auto it = index.find(key);
    if (it == index.end())
      throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    try {
      it->second->set(cfg, val);
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(lineno) + " (" + key + "): " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

TrainConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config '" + path.string() + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

std::string to_text(const TrainConfig& cfg) {
  std::string out;
  for (const auto& [k, f] : fields()) out += k + " = " + f.get(cfg) + "\n";
  return out;
}

}  // namespace gtp::train
