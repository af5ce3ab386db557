#include "gtp/nn/optim.hpp"

#include <cmath>

#include "gtp/common/error.hpp"

namespace gtp::nn {

void adam_step(AdamState& state, ParamVector& params, std::span<const double> grads) {
  const std::size_t n = params.size();
  if (grads.size() != n || state.m.size() != n || state.v.size() != n)
    throw ConfigError("adam_step: size mismatch");
  if (!all_finite(grads)) throw NumericError("adam_step: non-finite gradient");

  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t k = 0; k < n; ++k) {
    const double g = grads[k];
    state.m[k] = state.beta1 * state.m[k] + (1.0 - state.beta1) * g;
    state.v[k] = state.beta2 * state.v[k] + (1.0 - state.beta2) * g * g;
    const double mhat = state.m[k] / c1;
    const double vhat = state.v[k] / c2;
    params.values[k] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
  }
}

void ema_update(ParamVector& target, const ParamVector& online, double rate) {
  if (!(rate > 0.0 && rate <= 1.0)) throw ConfigError("ema_update: rate must lie in (0, 1]");
  if (target.size() != online.size()) throw ConfigError("ema_update: size mismatch");
  if (rate == 1.0) {
    target.values = online.values;
    return;
  }
  for (std::size_t k = 0; k < target.size(); ++k)
    target.values[k] = rate * online.values[k] + (1.0 - rate) * target.values[k];
}

ClipResult clip_grad_norm(std::span<double> grads, double max_norm) {
  if (!(max_norm > 0.0)) throw ConfigError("clip_grad_norm: max_norm must be > 0");
  if (!all_finite(grads)) throw NumericError("clip_grad_norm: non-finite gradient");
  const double norm = std::sqrt(squared_norm(grads));
  if (norm <= max_norm) return {norm, 1.0};
  const double scale = max_norm / norm;
  for (double& g : grads) g *= scale;
  return {norm, scale};
}

}  // namespace gtp::nn
