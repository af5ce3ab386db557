#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gtp::losses {

struct AdvantageConfig {
  double eta = 1.0;
  double eps = 1e-6;
  double weight_cap = 100.0;
  std::size_t n_value_samples = 4;

  void validate() const;

  friend bool operator==(const AdvantageConfig&, const AdvantageConfig&) = default;
};

/// w = min(exp(eta * max(0, q - v) / (std_a + eps)), weight_cap).
/// Exactly 1 whenever q <= v or eta == 0.
double advantage_weight(double q_sa, double v_s, double batch_std_a, const AdvantageConfig& cfg);

/// Population standard deviation.
double batch_std(std::span<const double> a);

/// Per-row weights using the batch standard deviation of A = q - v.
std::vector<double> advantage_weights(std::span<const double> q, std::span<const double> v,
                                      const AdvantageConfig& cfg);

}  // namespace gtp::losses
