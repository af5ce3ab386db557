#pragma once

// Dense-layer and activation kernels over a batch of rows.
//
// Two implementations share one contract: `reference::` is a straight-line
// serial version kept as the test oracle, the top-level functions split rows
// into fixed blocks of kRowBlock and run blocks under OpenMP. Parameter
// gradients are reduced block by block in ascending order, so results do not
// depend on the thread count.
//
// Layout: X is rows x in, W is in x out (row-major), b has out entries,
// Z is rows x out.

#include <cstddef>

#include "gtp/nn/activation.hpp"

namespace gtp::nn::kernels {

inline constexpr std::size_t kRowBlock = 32;

/// Z = X W + b.
void dense_forward(const double* X, const double* W, const double* b, double* Z, std::size_t rows,
                   std::size_t in, std::size_t out);

/// dX = dZ W^T (skipped when dX is null); dW += X^T dZ; db += column sums of dZ.
void dense_backward(const double* X, const double* W, const double* dZ, double* dX, double* dW,
                    double* db, std::size_t rows, std::size_t in, std::size_t out);

void activation_forward(Activation act, const double* z, double* a, std::size_t n);
/// dz = da * act'(z).
void activation_backward(Activation act, const double* z, const double* da, double* dz,
                         std::size_t n);

namespace reference {
void dense_forward(const double* X, const double* W, const double* b, double* Z, std::size_t rows,
                   std::size_t in, std::size_t out);
void dense_backward(const double* X, const double* W, const double* dZ, double* dX, double* dW,
                    double* db, std::size_t rows, std::size_t in, std::size_t out);
void activation_forward(Activation act, const double* z, double* a, std::size_t n);
void activation_backward(Activation act, const double* z, const double* da, double* dz,
                         std::size_t n);
}  // namespace reference

}  // namespace gtp::nn::kernels
