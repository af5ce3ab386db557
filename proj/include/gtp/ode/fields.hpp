#pragma once

#include <span>
#include <variant>
#include <vector>

#include "gtp/common/matrix.hpp"

namespace gtp::ode {

struct FlowMapNet;

namespace field {

/// (x - anchor) / t: the closed-form field anchored to one data sample.
struct Surrogate {
  Point anchor;
};

/// (x - E[x0 | x_t = x]) / t for data drawn from a weighted set of Dirac atoms
/// and x_t = x0 + t z.
struct PosteriorOracle {
  std::vector<Point> atoms;
  std::vector<double> weights;
};

/// (x - phi_inst(state, x, t)) / t read off a flow-map network.
struct Learned {
  const FlowMapNet* net = nullptr;
  Point state;
  bool use_ema = false;
};

/// f(x, t) = c.
struct Constant {
  Point c;
};

/// f(x, t) = x.
struct Linear {};

}  // namespace field

using VectorField =
    std::variant<field::Surrogate, field::PosteriorOracle, field::Learned, field::Constant,
                 field::Linear>;

/// Throws DomainError for t <= 0 on the data-driven fields.
Point eval_field(const VectorField& f, std::span<const double> x, double t);

/// E[x0 | x_t = x]; softmax over atoms evaluated in log space.
Point posterior_mean(const field::PosteriorOracle& f, std::span<const double> x, double t);

/// Positive weights summing to one, atoms of equal dimension.
void validate(const field::PosteriorOracle& f);

}  // namespace gtp::ode
