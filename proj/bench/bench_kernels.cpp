// Serial reference kernels against the OpenMP versions at training shapes
// (batch 256, 64-wide hidden layers). Set OMP_NUM_THREADS to compare scaling.

#include <benchmark/benchmark.h>

#include <vector>

#include "gtp/common/rng.hpp"
#include "gtp/nn/kernels.hpp"

namespace {

using namespace gtp::nn;

struct Buffers {
  std::size_t rows, in, out;
  std::vector<double> X, W, b, Z, dZ, dX, dW, db;

  Buffers(std::size_t r, std::size_t i, std::size_t o)
      : rows(r), in(i), out(o), X(r * i), W(i * o), b(o), Z(r * o), dZ(r * o), dX(r * i), dW(i * o), db(o) {
    gtp::Rng rng(1);
    for (auto* v : {&X, &W, &b, &dZ})
      for (auto& x : *v) x = rng.uniform(-1.0, 1.0);
  }
};

template <auto Fn>
void BM_dense_forward(benchmark::State& state) {
  Buffers buf(static_cast<std::size_t>(state.range(0)), 64, 64);
  for (auto _ : state) {
    Fn(buf.X.data(), buf.W.data(), buf.b.data(), buf.Z.data(), buf.rows, buf.in, buf.out);
    benchmark::DoNotOptimize(buf.Z.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <auto Fn>
void BM_dense_backward(benchmark::State& state) {
  Buffers buf(static_cast<std::size_t>(state.range(0)), 64, 64);
  for (auto _ : state) {
    Fn(buf.X.data(), buf.W.data(), buf.dZ.data(), buf.dX.data(), buf.dW.data(), buf.db.data(), buf.rows, buf.in,
       buf.out);
    benchmark::DoNotOptimize(buf.dW.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <auto Fn>
void BM_mish_forward(benchmark::State& state) {
  Buffers buf(static_cast<std::size_t>(state.range(0)), 64, 64);
  for (auto _ : state) {
    Fn(Activation::mish, buf.dZ.data(), buf.Z.data(), buf.Z.size());
    benchmark::DoNotOptimize(buf.Z.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_dense_forward<kernels::reference::dense_forward>)->Name("dense_forward/reference")->Arg(256)->Arg(4096);
BENCHMARK(BM_dense_forward<kernels::dense_forward>)->Name("dense_forward/parallel")->Arg(256)->Arg(4096);
BENCHMARK(BM_dense_backward<kernels::reference::dense_backward>)->Name("dense_backward/reference")->Arg(256)->Arg(4096);
BENCHMARK(BM_dense_backward<kernels::dense_backward>)->Name("dense_backward/parallel")->Arg(256)->Arg(4096);
BENCHMARK(BM_mish_forward<kernels::reference::activation_forward>)->Name("mish_forward/reference")->Arg(256)->Arg(4096);
BENCHMARK(BM_mish_forward<kernels::activation_forward>)->Name("mish_forward/parallel")->Arg(256)->Arg(4096);

BENCHMARK_MAIN();
