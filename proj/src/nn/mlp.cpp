#include "gtp/nn/mlp.hpp"

#include <cmath>
#include <string>

#include "gtp/common/error.hpp"
#include "gtp/nn/kernels.hpp"

namespace gtp::nn {

void MlpSpec::validate() const {
  if (input_dim + num_time_inputs == 0) throw ConfigError("MlpSpec: network has no inputs");
  if (output_dim == 0) throw ConfigError("MlpSpec: output_dim must be >= 1");
  if (hidden_dims.empty()) throw ConfigError("MlpSpec: hidden_dims must be non-empty");
  for (auto h : hidden_dims)
    if (h == 0) throw ConfigError("MlpSpec: hidden widths must be >= 1");
  if (time_embed_dim % 2 != 0) throw ConfigError("MlpSpec: time_embed_dim must be even");
  if (num_time_inputs > 0 && time_embed_dim == 0)
    throw ConfigError("MlpSpec: time inputs need a non-zero time_embed_dim");
}

std::size_t MlpSpec::param_count() const {
  std::size_t n = 0;
  std::size_t fan_in = feature_dim();
  for (auto h : hidden_dims) {
    n += fan_in * h + h;
    fan_in = h;
  }
  return n + fan_in * output_dim + output_dim;
}

std::vector<LayerView> layer_views(const MlpSpec& spec) {
  std::vector<LayerView> layers;
  std::size_t offset = 0;
  std::size_t fan_in = spec.feature_dim();
  auto push = [&](std::size_t fan_out) {
    layers.push_back({fan_in, fan_out, offset, offset + fan_in * fan_out});
    offset += fan_in * fan_out + fan_out;
    fan_in = fan_out;
  };
  for (auto h : spec.hidden_dims) push(h);
  push(spec.output_dim);
  return layers;
}

ParamVector init_params(const MlpSpec& spec, Rng& rng, bool zero_output_layer) {
  spec.validate();
  ParamVector p;
  p.values.assign(spec.param_count(), 0.0);
  const auto layers = layer_views(spec);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (zero_output_layer && l + 1 == layers.size()) break;
    const auto& L = layers[l];
    const double bound = 1.0 / std::sqrt(static_cast<double>(L.fan_in));
    const std::size_t n = L.fan_in * L.fan_out + L.fan_out;
    for (std::size_t k = 0; k < n; ++k) p.values[L.weight_offset + k] = rng.uniform(-bound, bound);
  }
  return p;
}

void embed_time(double t, std::size_t width, std::span<double> out) {
  const std::size_t half = width / 2;
  for (std::size_t k = 0; k < half; ++k) {
    const double freq =
        half == 1 ? 1.0 : std::pow(1000.0, static_cast<double>(k) / static_cast<double>(half - 1));
    out[2 * k] = std::sin(freq * t);
    out[2 * k + 1] = std::cos(freq * t);
  }
}

namespace {

Matrix build_features(const MlpSpec& spec, const Matrix& inputs, const Matrix* times) {
  if (inputs.cols != spec.input_dim)
    throw ConfigError("mlp_forward: input width " + std::to_string(inputs.cols) + " != " +
                      std::to_string(spec.input_dim));
  if (spec.num_time_inputs > 0) {
    if (times == nullptr || times->rows != inputs.rows || times->cols != spec.num_time_inputs)
      throw ConfigError("mlp_forward: time inputs missing or mis-shaped");
  }
  if (!all_finite(inputs.data)) throw NumericError("mlp_forward: non-finite input");
  if (spec.num_time_inputs == 0) return inputs;

  Matrix f(inputs.rows, spec.feature_dim());
  for (std::size_t r = 0; r < inputs.rows; ++r) {
    auto dst = f.row(r);
    auto src = inputs.row(r);
    std::copy(src.begin(), src.end(), dst.begin());
    for (std::size_t k = 0; k < spec.num_time_inputs; ++k) {
      const double t = (*times)(r, k);
      if (!std::isfinite(t)) throw NumericError("mlp_forward: non-finite time input");
      embed_time(t, spec.time_embed_dim,
                 dst.subspan(spec.input_dim + k * spec.time_embed_dim, spec.time_embed_dim));
    }
  }
  return f;
}

}  // namespace

Matrix mlp_forward(const MlpSpec& spec, const ParamVector& params, const Matrix& inputs,
                   const Matrix* times, ForwardCache* cache) {
  if (params.size() != spec.param_count())
    throw ConfigError("mlp_forward: parameter count does not match spec");
  const auto layers = layer_views(spec);
  Matrix x = build_features(spec, inputs, times);
  const std::size_t rows = x.rows;
  if (cache != nullptr) {
    cache->pre.clear();
    cache->post.clear();
    cache->features = x;
  }
  const double* w = params.values.data();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& L = layers[l];
    Matrix z(rows, L.fan_out);
    kernels::dense_forward(x.data.data(), w + L.weight_offset, w + L.bias_offset, z.data.data(),
                           rows, L.fan_in, L.fan_out);
    if (l + 1 == layers.size()) {
      if (cache != nullptr) cache->pre.push_back(z);
      return z;
    }
    Matrix a(rows, L.fan_out);
    kernels::activation_forward(spec.activation, z.data.data(), a.data.data(), z.data.size());
    if (cache != nullptr) {
      cache->pre.push_back(std::move(z));
      cache->post.push_back(a);
    }
    x = std::move(a);
  }
  return x;  // unreachable: there is always an output layer
}

MlpGradient mlp_backward(const MlpSpec& spec, const ParamVector& params, const ForwardCache& cache,
                         const Matrix& upstream, bool want_input_grad) {
  const auto layers = layer_views(spec);
  const std::size_t rows = cache.features.rows;
  if (upstream.rows != rows || upstream.cols != spec.output_dim)
    throw ConfigError("mlp_backward: upstream shape does not match the forward output");
  if (cache.pre.size() != layers.size()) throw ConfigError("mlp_backward: cache is empty");

  MlpGradient g;
  g.params.assign(params.size(), 0.0);
  const double* w = params.values.data();
  Matrix dz = upstream;
  for (std::size_t l = layers.size(); l-- > 0;) {
    const auto& L = layers[l];
    const Matrix& x = l == 0 ? cache.features : cache.post[l - 1];
    const bool need_dx = l > 0 || want_input_grad;
    Matrix dx(need_dx ? rows : 0, need_dx ? L.fan_in : 0);
    kernels::dense_backward(x.data.data(), w + L.weight_offset, dz.data.data(),
                            need_dx ? dx.data.data() : nullptr, g.params.data() + L.weight_offset,
                            g.params.data() + L.bias_offset, rows, L.fan_in, L.fan_out);
    if (l == 0) {
      if (want_input_grad) {
        g.inputs = Matrix(rows, spec.input_dim);
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t i = 0; i < spec.input_dim; ++i) g.inputs(r, i) = dx(r, i);
      }
      break;
    }
    const Matrix& zprev = cache.pre[l - 1];
    dz = Matrix(rows, L.fan_in);
    kernels::activation_backward(spec.activation, zprev.data.data(), dx.data.data(),
                                 dz.data.data(), dx.data.size());
  }
  return g;
}

MlpGradient mlp_grad(const MlpSpec& spec, const ParamVector& params, const Matrix& inputs,
                     const Matrix* times, const Matrix& upstream) {
  ForwardCache cache;
  mlp_forward(spec, params, inputs, times, &cache);
  return mlp_backward(spec, params, cache, upstream, true);
}

}  // namespace gtp::nn
