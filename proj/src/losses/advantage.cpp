#include "gtp/losses/advantage.hpp"

#include <algorithm>
#include <cmath>

#include "gtp/common/error.hpp"

namespace gtp::losses {

void AdvantageConfig::validate() const {
  if (!(eta >= 0.0)) throw ConfigError("advantage: eta must be >= 0");
  if (!(eps > 0.0)) throw ConfigError("advantage: eps must be > 0");
  if (!(weight_cap > 1.0)) throw ConfigError("advantage: weight_cap must be > 1");
  if (n_value_samples < 1) throw ConfigError("advantage: n_value_samples must be >= 1");
}

double advantage_weight(double q_sa, double v_s, double batch_std_a, const AdvantageConfig& cfg) {
  const double a = std::max(0.0, q_sa - v_s);
  const double w = std::exp(cfg.eta * a / (batch_std_a + cfg.eps));
  return std::min(w, cfg.weight_cap);
}

double batch_std(std::span<const double> a) {
  if (a.empty()) return 0.0;
  double mean = 0.0;
  for (double x : a) mean += x;
  mean /= static_cast<double>(a.size());
  double var = 0.0;
  for (double x : a) var += (x - mean) * (x - mean);
  return std::sqrt(var / static_cast<double>(a.size()));
}

std::vector<double> advantage_weights(std::span<const double> q, std::span<const double> v,
                                      const AdvantageConfig& cfg) {
  if (q.size() != v.size()) throw ConfigError("advantage_weights: length mismatch");
  std::vector<double> adv(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) adv[i] = q[i] - v[i];
  const double sd = batch_std(adv);
  std::vector<double> w(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) w[i] = advantage_weight(q[i], v[i], sd, cfg);
  return w;
}

}  // namespace gtp::losses
