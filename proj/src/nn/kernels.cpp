#include "gtp/nn/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "gtp/common/error.hpp"

namespace gtp::nn {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::mish: return "mish";
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
  }
  return "?";
}

Activation parse_activation(std::string_view name) {
  if (name == "mish") return Activation::mish;
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

namespace kernels {

namespace {

// mish(x) = x tanh(softplus(x)). With e = exp(x), tanh(log(1 + e)) = n / (n + 2)
// where n = e (e + 2), which needs a single exp.
inline double mish(double x) {
  if (x > 20.0) return x;
  const double e = std::exp(x);
  const double n = e * (e + 2.0);
  return x * n / (n + 2.0);
}

inline double mish_grad(double x) {
  if (x > 20.0) return 1.0;
  const double e = std::exp(x);
  const double n = e * (e + 2.0);
  const double tsp = n / (n + 2.0);
  const double sig = e / (1.0 + e);
  return tsp + x * sig * (1.0 - tsp * tsp);
}

inline double act_value(Activation act, double x) {
  switch (act) {
    case Activation::mish: return mish(x);
    case Activation::relu: return x > 0.0 ? x : 0.0;
    case Activation::tanh: return std::tanh(x);
  }
  return x;
}

inline double act_grad(Activation act, double x) {
  switch (act) {
    case Activation::mish: return mish_grad(x);
    case Activation::relu: return x > 0.0 ? 1.0 : 0.0;
    case Activation::tanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
  }
  return 1.0;
}

std::size_t block_count(std::size_t rows) { return (rows + kRowBlock - 1) / kRowBlock; }

void forward_rows(const double* X, const double* W, const double* b, double* Z, std::size_t r0,
                  std::size_t r1, std::size_t in, std::size_t out) {
  for (std::size_t r = r0; r < r1; ++r) {
    const double* x = X + r * in;
    double* z = Z + r * out;
    std::copy(b, b + out, z);
    for (std::size_t i = 0; i < in; ++i) {
      const double xi = x[i];
      const double* w = W + i * out;
      for (std::size_t j = 0; j < out; ++j) z[j] += xi * w[j];
    }
  }
}

}  // namespace

void dense_forward(const double* X, const double* W, const double* b, double* Z, std::size_t rows,
                   std::size_t in, std::size_t out) {
  const auto nblocks = static_cast<std::ptrdiff_t>(block_count(rows));
#if defined(GTP_HAVE_OPENMP)
#pragma omp parallel for schedule(static) if (nblocks > 1)
#endif
  for (std::ptrdiff_t blk = 0; blk < nblocks; ++blk) {
    const std::size_t r0 = static_cast<std::size_t>(blk) * kRowBlock;
    forward_rows(X, W, b, Z, r0, std::min(rows, r0 + kRowBlock), in, out);
  }
}

void dense_backward(const double* X, const double* W, const double* dZ, double* dX, double* dW,
                    double* db, std::size_t rows, std::size_t in, std::size_t out) {
  const std::size_t nblocks = block_count(rows);
  const std::size_t wsize = in * out;

  // W^T turns the input gradient into contiguous axpy updates.
  std::vector<double> Wt;
  if (dX != nullptr) {
    Wt.resize(wsize);
    for (std::size_t i = 0; i < in; ++i)
      for (std::size_t j = 0; j < out; ++j) Wt[j * in + i] = W[i * out + j];
  }
  std::vector<double> partial(nblocks * (wsize + out), 0.0);

#if defined(GTP_HAVE_OPENMP)
#pragma omp parallel for schedule(static) if (nblocks > 1)
#endif
  for (std::ptrdiff_t blk = 0; blk < static_cast<std::ptrdiff_t>(nblocks); ++blk) {
    const std::size_t r0 = static_cast<std::size_t>(blk) * kRowBlock;
    const std::size_t r1 = std::min(rows, r0 + kRowBlock);
    double* pw = partial.data() + static_cast<std::size_t>(blk) * (wsize + out);
    double* pb = pw + wsize;
    for (std::size_t r = r0; r < r1; ++r) {
      const double* x = X + r * in;
      const double* dz = dZ + r * out;
      for (std::size_t i = 0; i < in; ++i) {
        const double xi = x[i];
        double* w = pw + i * out;
        for (std::size_t j = 0; j < out; ++j) w[j] += xi * dz[j];
      }
      for (std::size_t j = 0; j < out; ++j) pb[j] += dz[j];
      if (dX != nullptr) {
        double* dx = dX + r * in;
        std::fill(dx, dx + in, 0.0);
        for (std::size_t j = 0; j < out; ++j) {
          const double g = dz[j];
          const double* wt = Wt.data() + j * in;
          for (std::size_t i = 0; i < in; ++i) dx[i] += g * wt[i];
        }
      }
    }
  }

  for (std::size_t blk = 0; blk < nblocks; ++blk) {
    const double* pw = partial.data() + blk * (wsize + out);
    for (std::size_t k = 0; k < wsize; ++k) dW[k] += pw[k];
    for (std::size_t j = 0; j < out; ++j) db[j] += pw[wsize + j];
  }
}

void activation_forward(Activation act, const double* z, double* a, std::size_t n) {
  const auto nn = static_cast<std::ptrdiff_t>(n);
#if defined(GTP_HAVE_OPENMP)
#pragma omp parallel for schedule(static) if (nn > 8192)
#endif
  for (std::ptrdiff_t k = 0; k < nn; ++k) a[k] = act_value(act, z[k]);
}

void activation_backward(Activation act, const double* z, const double* da, double* dz,
                         std::size_t n) {
  const auto nn = static_cast<std::ptrdiff_t>(n);
#if defined(GTP_HAVE_OPENMP)
#pragma omp parallel for schedule(static) if (nn > 8192)
#endif
  for (std::ptrdiff_t k = 0; k < nn; ++k) dz[k] = da[k] * act_grad(act, z[k]);
}

namespace reference {

void dense_forward(const double* X, const double* W, const double* b, double* Z, std::size_t rows,
                   std::size_t in, std::size_t out) {
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t j = 0; j < out; ++j) {
      double s = b[j];
      for (std::size_t i = 0; i < in; ++i) s += X[r * in + i] * W[i * out + j];
      Z[r * out + j] = s;
    }
}

void dense_backward(const double* X, const double* W, const double* dZ, double* dX, double* dW,
                    double* db, std::size_t rows, std::size_t in, std::size_t out) {
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t i = 0; i < in; ++i)
      for (std::size_t j = 0; j < out; ++j) dW[i * out + j] += X[r * in + i] * dZ[r * out + j];
    for (std::size_t j = 0; j < out; ++j) db[j] += dZ[r * out + j];
    if (dX != nullptr)
      for (std::size_t i = 0; i < in; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < out; ++j) s += dZ[r * out + j] * W[i * out + j];
        dX[r * in + i] = s;
      }
  }
}

void activation_forward(Activation act, const double* z, double* a, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) {
    const double x = z[k];
    switch (act) {
      case Activation::mish: a[k] = x * std::tanh(std::log1p(std::exp(x))); break;
      case Activation::relu: a[k] = std::max(x, 0.0); break;
      case Activation::tanh: a[k] = std::tanh(x); break;
    }
  }
}

void activation_backward(Activation act, const double* z, const double* da, double* dz,
                         std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) {
    const double x = z[k];
    double g = 1.0;
    switch (act) {
      case Activation::mish: {
        const double sp = std::log1p(std::exp(x));
        const double tsp = std::tanh(sp);
        const double sig = 1.0 / (1.0 + std::exp(-x));
        g = tsp + x * sig * (1.0 - tsp * tsp);
        break;
      }
      case Activation::relu: g = x > 0.0 ? 1.0 : 0.0; break;
      case Activation::tanh: g = 1.0 - std::tanh(x) * std::tanh(x); break;
    }
    dz[k] = da[k] * g;
  }
}

}  // namespace reference
}  // namespace kernels
}  // namespace gtp::nn
