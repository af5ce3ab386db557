#include "gtp/ode/fields.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gtp/common/error.hpp"
#include "gtp/ode/flowmap.hpp"

namespace gtp::ode {

namespace {

void require_positive_time(double t, const char* who) {
  if (!(t > 0.0)) throw DomainError(std::string(who) + ": requires t > 0, got " + std::to_string(t));
}

void require_dim(std::size_t got, std::size_t want, const char* who) {
  if (got != want)
    throw ConfigError(std::string(who) + ": dimension " + std::to_string(got) + " != " +
                      std::to_string(want));
}

}  // namespace

void validate(const field::PosteriorOracle& f) {
  if (f.atoms.empty() || f.atoms.size() != f.weights.size())
    throw ConfigError("posterior oracle: need one weight per atom");
  double total = 0.0;
  for (std::size_t i = 0; i < f.atoms.size(); ++i) {
    if (!(f.weights[i] > 0.0)) throw ConfigError("posterior oracle: weights must be positive");
    if (f.atoms[i].size() != f.atoms.front().size())
      throw ConfigError("posterior oracle: atoms differ in dimension");
    total += f.weights[i];
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("posterior oracle: weights must sum to 1");
}

Point posterior_mean(const field::PosteriorOracle& f, std::span<const double> x, double t) {
  require_positive_time(t, "posterior_mean");
  const std::size_t d = x.size();
  const std::size_t n = f.atoms.size();
  std::vector<double> logw(n);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    require_dim(f.atoms[i].size(), d, "posterior_mean");
    double dist2 = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double diff = x[k] - f.atoms[i][k];
      dist2 += diff * diff;
    }
    logw[i] = std::log(f.weights[i]) - dist2 / (2.0 * t * t);
    best = std::max(best, logw[i]);
  }
  double total = 0.0;
  for (auto& lw : logw) {
    lw = std::exp(lw - best);
    total += lw;
  }
  Point mean(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < d; ++k) mean[k] += (logw[i] / total) * f.atoms[i][k];
  return mean;
}

Point eval_field(const VectorField& f, std::span<const double> x, double t) {
  struct Visitor {
    std::span<const double> x;
    double t;

    Point operator()(const field::Surrogate& s) const {
      require_positive_time(t, "surrogate field");
      require_dim(s.anchor.size(), x.size(), "surrogate field");
      Point v(x.size());
      for (std::size_t k = 0; k < x.size(); ++k) v[k] = (x[k] - s.anchor[k]) / t;
      return v;
    }
    Point operator()(const field::PosteriorOracle& p) const {
      const Point mean = posterior_mean(p, x, t);
      Point v(x.size());
      for (std::size_t k = 0; k < x.size(); ++k) v[k] = (x[k] - mean[k]) / t;
      return v;
    }
    Point operator()(const field::Learned& l) const {
      require_positive_time(t, "learned field");
      if (l.net == nullptr) throw ConfigError("learned field: no network");
      const Point inst = phi_inst(*l.net, l.state, x, t, l.use_ema);
      Point v(x.size());
      for (std::size_t k = 0; k < x.size(); ++k) v[k] = (x[k] - inst[k]) / t;
      return v;
    }
    Point operator()(const field::Constant& c) const {
      require_dim(c.c.size(), x.size(), "constant field");
      return c.c;
    }
    Point operator()(const field::Linear&) const { return Point(x.begin(), x.end()); }
  };
  return std::visit(Visitor{x, t}, f);
}

}  // namespace gtp::ode
