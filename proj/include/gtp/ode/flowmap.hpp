#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gtp/common/matrix.hpp"
#include "gtp/common/rng.hpp"
#include "gtp/nn/mlp.hpp"

namespace gtp::ode {

/// Phi = (1 - tau/t) phi + (tau/t) x_t. Requires t > 0 and 0 <= tau <= t.
Point phi_to_flowmap(std::span<const double> phi, std::span<const double> x_t, double t, double tau);

struct TimeDomain {
  double T = 5.0;
  double t_min = 0.002;
  double rho = 7.0;

  friend bool operator==(const TimeDomain&, const TimeDomain&) = default;
};

struct ActorArch {
  std::vector<std::size_t> hidden{64, 64};
  nn::Activation activation = nn::Activation::mish;
  std::size_t time_embed_dim = 8;
  /// Width of the identity blend; 0 makes phi the raw network output.
  double skip_sigma = 0.0;

  friend bool operator==(const ActorArch&, const ActorArch&) = default;
};

/// The actor: a network for phi(state, a_t, t, tau) and its EMA twin.
///
/// Network inputs are [state, c_in(t) a_t] plus the two time inputs t/T and
/// tau/T, with c_in(t) = 1 / sqrt(t^2 + sigma_data^2) keeping the noisy
/// action at unit scale across noise levels.
struct FlowMapNet {
  nn::MlpSpec spec;
  nn::ParamVector online;
  nn::ParamVector ema;
  std::size_t state_dim = 0;
  std::size_t action_dim = 0;
  TimeDomain time;
  double sigma_data = 0.5;
  double skip_sigma = 0.0;
  double action_bound = 1.0;

  const nn::ParamVector& params(bool use_ema) const { return use_ema ? ema : online; }
  // phi = c a_t + (1 - c) F(state, input_scale(t) a_t, t, tau) with c = skip_scale(t)
  // and F the MLP. c = skip_sigma^2 / (t^2 + skip_sigma^2), so phi tends to a_t
  // once t is well below the spread of a single action cluster.
  double input_scale(double t) const;
  double skip_scale(double t) const;
  /// Scalar fed to the time embedding: t / T.
  double time_feature(double t) const;

  friend bool operator==(const FlowMapNet&, const FlowMapNet&) = default;
};

/// Zero-initialized output layer, so phi starts at 0 and Phi = (tau/t) a_t.
/// The EMA copy starts equal to the online parameters.
FlowMapNet make_flowmap_net(std::size_t state_dim, std::size_t action_dim, const TimeDomain& time,
                            const ActorArch& arch, Rng& rng, bool zero_output_layer = true);

/// Network inputs for a batch: rows x (state_dim + action_dim), times rows x 2.
void actor_inputs(const FlowMapNet& net, const Matrix& states, const Matrix& a_t,
                  std::span<const double> t, std::span<const double> tau, Matrix& inputs,
                  Matrix& times);

/// Raw network output phi for each row.
Matrix phi_batch(const FlowMapNet& net, const Matrix& states, const Matrix& a_t,
                 std::span<const double> t, std::span<const double> tau, bool use_ema,
                 nn::ForwardCache* cache = nullptr);

struct PhiGradient {
  std::vector<double> params;
  Matrix actions;  // d/d a_t, empty unless requested
};

/// Pulls d_phi back through a phi_batch call recorded in `cache`.
PhiGradient phi_backward(const FlowMapNet& net, const nn::ForwardCache& cache, std::span<const double> t,
                         const Matrix& d_phi, bool use_ema, bool want_actions);

/// Phi(state, a_t, t, tau) per row.
Matrix flowmap_eval_batch(const FlowMapNet& net, const Matrix& states, const Matrix& a_t,
                          std::span<const double> t, std::span<const double> tau, bool use_ema);

Point flowmap_eval(const FlowMapNet& net, std::span<const double> state, std::span<const double> a_t,
                   double t, double tau, bool use_ema);

/// phi(state, x, t, t), the instantaneous denoiser.
Point phi_inst(const FlowMapNet& net, std::span<const double> state, std::span<const double> x,
               double t, bool use_ema);

/// K-point rho grid from T to t_min (just {T} when K = 1) followed by 0.
std::vector<double> sampling_times(const TimeDomain& time, std::size_t K);

/// Everything the sampler's backward pass needs.
struct SampleTape {
  std::vector<double> times;
  Matrix states;
  std::vector<Matrix> a_in;               // action entering each jump
  std::vector<nn::ForwardCache> caches;   // network cache of each jump
  Matrix pre_clamp;                       // a_0 before clamping
};

/// a_T ~ N(0, T^2 I), K jumps of Phi, final clamp to the action box.
Point sample_actions(const FlowMapNet& net, std::span<const double> state, std::size_t K, Rng& rng,
                     bool use_ema = false);

/// Row r draws its noise from base.split(r), so it equals
/// sample_actions(net, states.row(r), K, base.split(r)).
Matrix sample_actions_batch(const FlowMapNet& net, const Matrix& states, std::size_t K,
                            const Rng& base, bool use_ema = false, SampleTape* tape = nullptr);

/// Gradient of <d_actions, sampled actions> with respect to the parameters
/// used when the tape was recorded.
std::vector<double> sample_actions_backward(const FlowMapNet& net, const SampleTape& tape,
                                            const Matrix& d_actions, bool use_ema = false);

}  // namespace gtp::ode
