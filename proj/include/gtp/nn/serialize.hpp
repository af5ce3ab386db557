#pragma once

// Binary ParamVector records, all integers and reals little-endian:
//
//   u64 input_dim, u64 n_hidden, u64 hidden[n_hidden], u64 output_dim,
//   u32 activation (0 mish, 1 relu, 2 tanh), u64 time_embed_dim,
//   u64 num_time_inputs, u64 length, f64 values[length]

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <vector>

#include "gtp/nn/mlp.hpp"
#include "gtp/nn/optim.hpp"

namespace gtp::nn {

namespace io {
void write_u32(std::ostream& os, std::uint32_t v);
void write_u64(std::ostream& os, std::uint64_t v);
void write_f64(std::ostream& os, double v);
void write_f64s(std::ostream& os, std::span<const double> v);
std::uint32_t read_u32(std::istream& is);
std::uint64_t read_u64(std::istream& is);
double read_f64(std::istream& is);
std::vector<double> read_f64s(std::istream& is, std::uint64_t n);
}  // namespace io

void write_spec(std::ostream& os, const MlpSpec& spec);
MlpSpec read_spec(std::istream& is);

void write_params(std::ostream& os, const MlpSpec& spec, const ParamVector& params);
/// Reads a record written by write_params; the stored spec must equal `expected`.
ParamVector read_params(std::istream& is, const MlpSpec& expected);
Network read_network(std::istream& is);

/// u64 step_count, f64 lr, beta1, beta2, eps, u64 length, f64 m[length], f64 v[length].
void write_adam(std::ostream& os, const AdamState& state);
AdamState read_adam(std::istream& is);

}  // namespace gtp::nn
