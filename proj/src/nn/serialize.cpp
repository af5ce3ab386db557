#include "gtp/nn/serialize.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <string>

#include "gtp/common/error.hpp"

namespace gtp::nn {

namespace io {

namespace {
// Values above this are treated as a corrupt length field.
constexpr std::uint64_t kMaxLength = 1ULL << 32;

void need(std::istream& is, const char* what) {
  if (!is) throw ParseError(std::string("truncated record while reading ") + what);
}
}  // namespace

void write_u32(std::ostream& os, std::uint32_t v) {
  std::array<char, 4> b{};
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFFu);
  os.write(b.data(), 4);
}

void write_u64(std::ostream& os, std::uint64_t v) {
  std::array<char, 8> b{};
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFFu);
  os.write(b.data(), 8);
}

void write_f64(std::ostream& os, double v) { write_u64(os, std::bit_cast<std::uint64_t>(v)); }

void write_f64s(std::ostream& os, std::span<const double> v) {
  for (double x : v) write_f64(os, x);
}

std::uint32_t read_u32(std::istream& is) {
  std::array<unsigned char, 4> b{};
  is.read(reinterpret_cast<char*>(b.data()), 4);
  need(is, "u32");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t read_u64(std::istream& is) {
  std::array<unsigned char, 8> b{};
  is.read(reinterpret_cast<char*>(b.data()), 8);
  need(is, "u64");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

double read_f64(std::istream& is) { return std::bit_cast<double>(read_u64(is)); }

std::vector<double> read_f64s(std::istream& is, std::uint64_t n) {
  if (n > kMaxLength) throw ParseError("implausible array length " + std::to_string(n));
  std::vector<double> v(n);
  for (auto& x : v) x = read_f64(is);
  return v;
}

}  // namespace io

void write_spec(std::ostream& os, const MlpSpec& spec) {
  io::write_u64(os, spec.input_dim);
  io::write_u64(os, spec.hidden_dims.size());
  for (auto h : spec.hidden_dims) io::write_u64(os, h);
  io::write_u64(os, spec.output_dim);
  io::write_u32(os, static_cast<std::uint32_t>(spec.activation));
  io::write_u64(os, spec.time_embed_dim);
  io::write_u64(os, spec.num_time_inputs);
}

MlpSpec read_spec(std::istream& is) {
  MlpSpec s;
  s.input_dim = io::read_u64(is);
  const auto n_hidden = io::read_u64(is);
  if (n_hidden > 64) throw ParseError("implausible hidden layer count");
  s.hidden_dims.resize(n_hidden);
  for (auto& h : s.hidden_dims) h = io::read_u64(is);
  s.output_dim = io::read_u64(is);
  const auto act = io::read_u32(is);
  if (act > 2) throw ParseError("unknown activation code " + std::to_string(act));
  s.activation = static_cast<Activation>(act);
  s.time_embed_dim = io::read_u64(is);
  s.num_time_inputs = io::read_u64(is);
  try {
    s.validate();
  } catch (const ConfigError& e) {
    throw ParseError(std::string("stored spec invalid: ") + e.what());
  }
  return s;
}

void write_params(std::ostream& os, const MlpSpec& spec, const ParamVector& params) {
  write_spec(os, spec);
  io::write_u64(os, params.size());
  io::write_f64s(os, params.values);
}

Network read_network(std::istream& is) {
  Network net;
  net.spec = read_spec(is);
  const auto n = io::read_u64(is);
  if (n != net.spec.param_count())
    throw ParseError("parameter length " + std::to_string(n) + " does not match the stored spec");
  net.params.values = io::read_f64s(is, n);
  return net;
}

ParamVector read_params(std::istream& is, const MlpSpec& expected) {
  Network net = read_network(is);
  if (!(net.spec == expected)) throw ParseError("stored network spec differs from the expected one");
  return std::move(net.params);
}

void write_adam(std::ostream& os, const AdamState& state) {
  io::write_u64(os, state.step_count);
  io::write_f64(os, state.lr);
  io::write_f64(os, state.beta1);
  io::write_f64(os, state.beta2);
  io::write_f64(os, state.eps);
  io::write_u64(os, state.m.size());
  io::write_f64s(os, state.m);
  io::write_f64s(os, state.v);
}

AdamState read_adam(std::istream& is) {
  AdamState s;
  s.step_count = io::read_u64(is);
  s.lr = io::read_f64(is);
  s.beta1 = io::read_f64(is);
  s.beta2 = io::read_f64(is);
  s.eps = io::read_f64(is);
  const auto n = io::read_u64(is);
  s.m = io::read_f64s(is, n);
  s.v = io::read_f64s(is, n);
  return s;
}

}  // namespace gtp::nn
