#include "gtp/ode/flowmap.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gtp/common/error.hpp"
#include "gtp/ode/solvers.hpp"

namespace gtp::ode {

namespace {

void check_times(double t, double tau) {
  if (!(t > 0.0)) throw DomainError("flow map: requires t > 0, got " + std::to_string(t));
  if (!(tau >= 0.0) || tau > t)
    throw DomainError("flow map: requires 0 <= tau <= t, got tau=" + std::to_string(tau) +
                      " t=" + std::to_string(t));
}

Matrix single_row(std::span<const double> v) {
  Matrix m(1, v.size());
  m.set_row(0, v);
  return m;
}

}  // namespace

Point phi_to_flowmap(std::span<const double> phi, std::span<const double> x_t, double t, double tau) {
  check_times(t, tau);
  if (phi.size() != x_t.size()) throw ConfigError("phi_to_flowmap: dimension mismatch");
  const double s = tau / t;
  Point out(x_t.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = (1.0 - s) * phi[k] + s * x_t[k];
  return out;
}

double FlowMapNet::time_feature(double t) const { return t / time.T; }

double FlowMapNet::input_scale(double t) const { return 1.0 / std::sqrt(t * t + sigma_data * sigma_data); }

double FlowMapNet::skip_scale(double t) const {
  if (skip_sigma == 0.0) return 0.0;
  return skip_sigma * skip_sigma / (t * t + skip_sigma * skip_sigma);
}

FlowMapNet make_flowmap_net(std::size_t state_dim, std::size_t action_dim, const TimeDomain& time,
                            const ActorArch& arch, Rng& rng, bool zero_output_layer) {
  if (action_dim == 0) throw ConfigError("flow map: action_dim must be >= 1");
  FlowMapNet net;
  net.state_dim = state_dim;
  net.action_dim = action_dim;
  net.time = time;
  net.spec.input_dim = state_dim + action_dim;
  net.spec.hidden_dims = arch.hidden;
  net.spec.output_dim = action_dim;
  net.spec.activation = arch.activation;
  net.spec.time_embed_dim = arch.time_embed_dim;
  net.spec.num_time_inputs = 2;
  net.online = nn::init_params(net.spec, rng, zero_output_layer);
  net.skip_sigma = arch.skip_sigma;
  net.ema = net.online;
  return net;
}

void actor_inputs(const FlowMapNet& net, const Matrix& states, const Matrix& a_t,
                  std::span<const double> t, std::span<const double> tau, Matrix& inputs,
                  Matrix& times) {
  const std::size_t rows = a_t.rows;
  if (a_t.cols != net.action_dim) throw ConfigError("flow map: action width mismatch");
  if (states.cols != net.state_dim || (net.state_dim > 0 && states.rows != rows))
    throw ConfigError("flow map: state shape mismatch");
  if (t.size() != rows || tau.size() != rows) throw ConfigError("flow map: time vector length mismatch");
  inputs = Matrix(rows, net.state_dim + net.action_dim);
  times = Matrix(rows, 2);
  for (std::size_t r = 0; r < rows; ++r) {
    check_times(t[r], tau[r]);
    const double c = net.input_scale(t[r]);
    for (std::size_t k = 0; k < net.state_dim; ++k) inputs(r, k) = states(r, k);
    for (std::size_t k = 0; k < net.action_dim; ++k) inputs(r, net.state_dim + k) = c * a_t(r, k);
    times(r, 0) = net.time_feature(t[r]);
    times(r, 1) = net.time_feature(tau[r]);
  }
}

Matrix phi_batch(const FlowMapNet& net, const Matrix& states, const Matrix& a_t,
                 std::span<const double> t, std::span<const double> tau, bool use_ema,
                 nn::ForwardCache* cache) {
  Matrix inputs, times;
  actor_inputs(net, states, a_t, t, tau, inputs, times);
  Matrix out = nn::mlp_forward(net.spec, net.params(use_ema), inputs, &times, cache);
  for (std::size_t r = 0; r < out.rows; ++r) {
    const double skip = net.skip_scale(t[r]);
    if (skip == 0.0) continue;
    for (std::size_t k = 0; k < out.cols; ++k) out(r, k) = skip * a_t(r, k) + (1.0 - skip) * out(r, k);
  }
  return out;
}

PhiGradient phi_backward(const FlowMapNet& net, const nn::ForwardCache& cache, std::span<const double> t,
                         const Matrix& d_phi, bool use_ema, bool want_actions) {
  const std::size_t rows = d_phi.rows;
  if (t.size() != rows || d_phi.cols != net.action_dim) throw ConfigError("phi_backward: shape mismatch");
  Matrix up(rows, net.action_dim);
  for (std::size_t r = 0; r < rows; ++r) {
    const double scale = 1.0 - net.skip_scale(t[r]);
    for (std::size_t k = 0; k < net.action_dim; ++k) up(r, k) = scale * d_phi(r, k);
  }
  nn::MlpGradient mg = nn::mlp_backward(net.spec, net.params(use_ema), cache, up, want_actions);
  PhiGradient out;
  out.params = std::move(mg.params);
  if (want_actions) {
    out.actions = Matrix(rows, net.action_dim);
    for (std::size_t r = 0; r < rows; ++r) {
      const double skip = net.skip_scale(t[r]);
      const double c = net.input_scale(t[r]);
      for (std::size_t k = 0; k < net.action_dim; ++k)
        out.actions(r, k) = skip * d_phi(r, k) + c * mg.inputs(r, net.state_dim + k);
    }
  }
  return out;
}

Matrix flowmap_eval_batch(const FlowMapNet& net, const Matrix& states, const Matrix& a_t,
                          std::span<const double> t, std::span<const double> tau, bool use_ema) {
  Matrix phi = phi_batch(net, states, a_t, t, tau, use_ema);
  for (std::size_t r = 0; r < phi.rows; ++r) {
    const double s = tau[r] / t[r];
    for (std::size_t k = 0; k < phi.cols; ++k) phi(r, k) = (1.0 - s) * phi(r, k) + s * a_t(r, k);
  }
  return phi;
}

Point flowmap_eval(const FlowMapNet& net, std::span<const double> state, std::span<const double> a_t,
                   double t, double tau, bool use_ema) {
  const double tt[1] = {t};
  const double ss[1] = {tau};
  const Matrix out = flowmap_eval_batch(net, single_row(state), single_row(a_t), tt, ss, use_ema);
  return Point(out.data.begin(), out.data.end());
}

Point phi_inst(const FlowMapNet& net, std::span<const double> state, std::span<const double> x,
               double t, bool use_ema) {
  const double tt[1] = {t};
  const Matrix out = phi_batch(net, single_row(state), single_row(x), tt, tt, use_ema);
  return Point(out.data.begin(), out.data.end());
}

std::vector<double> sampling_times(const TimeDomain& time, std::size_t K) {
  if (K == 0) throw ConfigError("sampler: K must be >= 1");
  std::vector<double> ts;
  if (K == 1) {
    ts = {time.T};
  } else {
    ts = TimeGrid::make(time.T, time.t_min, K, time.rho).points;
  }
  ts.push_back(0.0);
  return ts;
}

Matrix sample_actions_batch(const FlowMapNet& net, const Matrix& states, std::size_t K,
                            const Rng& base, bool use_ema, SampleTape* tape) {
  const std::vector<double> ts = sampling_times(net.time, K);
  const std::size_t rows = states.rows;
  Matrix a(rows, net.action_dim);
  for (std::size_t r = 0; r < rows; ++r) {
    Rng rr = base.split(r);
    for (std::size_t k = 0; k < net.action_dim; ++k) a(r, k) = net.time.T * rr.normal();
  }
  if (tape != nullptr) {
    tape->times = ts;
    tape->states = states;
    tape->a_in.clear();
    tape->caches.assign(ts.size() - 1, {});
  }
  std::vector<double> tcol(rows), scol(rows);
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    std::fill(tcol.begin(), tcol.end(), ts[i]);
    std::fill(scol.begin(), scol.end(), ts[i + 1]);
    nn::ForwardCache* cache = tape != nullptr ? &tape->caches[i] : nullptr;
    if (tape != nullptr) tape->a_in.push_back(a);
    Matrix phi = phi_batch(net, states, a, tcol, scol, use_ema, cache);
    const double s = ts[i + 1] / ts[i];
    for (std::size_t k = 0; k < a.data.size(); ++k) a.data[k] = (1.0 - s) * phi.data[k] + s * a.data[k];
  }
  if (!all_finite(a.data)) throw NumericError("sample_actions: non-finite action");
  if (tape != nullptr) tape->pre_clamp = a;
  for (double& v : a.data) v = std::clamp(v, -net.action_bound, net.action_bound);
  return a;
}

Point sample_actions(const FlowMapNet& net, std::span<const double> state, std::size_t K, Rng& rng,
                     bool use_ema) {
  const std::vector<double> ts = sampling_times(net.time, K);
  Point a(net.action_dim);
  for (auto& v : a) v = net.time.T * rng.normal();
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) a = flowmap_eval(net, state, a, ts[i], ts[i + 1], use_ema);
  if (!all_finite(a)) throw NumericError("sample_actions: non-finite action");
  for (auto& v : a) v = std::clamp(v, -net.action_bound, net.action_bound);
  return a;
}

std::vector<double> sample_actions_backward(const FlowMapNet& net, const SampleTape& tape,
                                            const Matrix& d_actions, bool use_ema) {
  const std::size_t rows = tape.pre_clamp.rows;
  if (d_actions.rows != rows || d_actions.cols != net.action_dim)
    throw ConfigError("sample_actions_backward: gradient shape mismatch");
  std::vector<double> grad(net.spec.param_count(), 0.0);

  // Clamp passes gradient only where it did not bind.
  Matrix g = d_actions;
  for (std::size_t k = 0; k < g.data.size(); ++k)
    if (std::abs(tape.pre_clamp.data[k]) > net.action_bound) g.data[k] = 0.0;

  const auto& ts = tape.times;
  for (std::size_t i = ts.size() - 1; i-- > 0;) {
    const std::vector<double> tcol(rows, ts[i]);
    const double s = ts[i + 1] / ts[i];
    Matrix d_phi(rows, net.action_dim);
    for (std::size_t k = 0; k < d_phi.data.size(); ++k) d_phi.data[k] = (1.0 - s) * g.data[k];
    const PhiGradient pg = phi_backward(net, tape.caches[i], tcol, d_phi, use_ema, true);
    for (std::size_t k = 0; k < grad.size(); ++k) grad[k] += pg.params[k];
    for (std::size_t k = 0; k < g.data.size(); ++k) g.data[k] = pg.actions.data[k] + s * g.data[k];
  }
  return grad;
}

}  // namespace gtp::ode
