#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gtp/nn/mlp.hpp"

namespace gtp::nn {

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step_count = 0;
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  AdamState() = default;
  AdamState(std::size_t n, double learning_rate) : m(n, 0.0), v(n, 0.0), lr(learning_rate) {}

  friend bool operator==(const AdamState&, const AdamState&) = default;
};

/// Bias-corrected Adam update. Throws NumericError (leaving state and params
/// untouched) when a gradient entry is not finite.
void adam_step(AdamState& state, ParamVector& params, std::span<const double> grads);

/// target <- rate * online + (1 - rate) * target, rate in (0, 1].
void ema_update(ParamVector& target, const ParamVector& online, double rate);

struct ClipResult {
  double norm;   // global L2 norm before clipping
  double scale;  // factor applied (1 when unchanged)
};

ClipResult clip_grad_norm(std::span<double> grads, double max_norm);

}  // namespace gtp::nn
