#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gtp/common/matrix.hpp"
#include "gtp/common/rng.hpp"
#include "gtp/nn/activation.hpp"

namespace gtp::nn {

/// Fixed-topology fully connected network.
///
/// Scalar time inputs are not fed raw: each one is replaced by a sinusoidal
/// embedding of width `time_embed_dim` (sin/cos pairs, frequencies geometric
/// from 1 to 1000) and appended after the `input_dim` ordinary features.
struct MlpSpec {
  std::size_t input_dim = 1;
  std::vector<std::size_t> hidden_dims{64};
  std::size_t output_dim = 1;
  Activation activation = Activation::mish;
  std::size_t time_embed_dim = 0;
  std::size_t num_time_inputs = 0;

  void validate() const;
  /// Width of the first layer's input after time embedding.
  std::size_t feature_dim() const { return input_dim + num_time_inputs * time_embed_dim; }
  std::size_t num_layers() const { return hidden_dims.size() + 1; }
  std::size_t param_count() const;

  friend bool operator==(const MlpSpec&, const MlpSpec&) = default;
};

struct LayerView {
  std::size_t fan_in;
  std::size_t fan_out;
  std::size_t weight_offset;  // fan_in x fan_out, row-major
  std::size_t bias_offset;
};

std::vector<LayerView> layer_views(const MlpSpec& spec);

/// Flat parameters; per layer the weights come first, then the biases.
struct ParamVector {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  std::span<double> span() { return values; }
  std::span<const double> span() const { return values; }

  friend bool operator==(const ParamVector&, const ParamVector&) = default;
};

/// Uniform(+-1/sqrt(fan_in)) weights and biases; `zero_output_layer` zeroes the last layer.
ParamVector init_params(const MlpSpec& spec, Rng& rng, bool zero_output_layer = false);

void embed_time(double t, std::size_t width, std::span<double> out);

/// Activations kept by a forward pass for the backward pass.
struct ForwardCache {
  Matrix features;              // layer-0 input (inputs + time embeddings)
  std::vector<Matrix> pre;      // pre-activation of every layer
  std::vector<Matrix> post;     // post-activation of every hidden layer
};

/// `times` may be null when spec.num_time_inputs == 0; otherwise rows x num_time_inputs.
Matrix mlp_forward(const MlpSpec& spec, const ParamVector& params, const Matrix& inputs,
                   const Matrix* times = nullptr, ForwardCache* cache = nullptr);

struct MlpGradient {
  std::vector<double> params;  // same layout as ParamVector
  Matrix inputs;               // d/d inputs (ordinary features only)
};

/// Gradient of <upstream, output> using a cache filled by mlp_forward.
MlpGradient mlp_backward(const MlpSpec& spec, const ParamVector& params, const ForwardCache& cache,
                         const Matrix& upstream, bool want_input_grad = true);

/// Forward + backward in one call.
MlpGradient mlp_grad(const MlpSpec& spec, const ParamVector& params, const Matrix& inputs,
                     const Matrix* times, const Matrix& upstream);

/// Network plus the MlpSpec it was built from.
struct Network {
  MlpSpec spec;
  ParamVector params;
};

}  // namespace gtp::nn
