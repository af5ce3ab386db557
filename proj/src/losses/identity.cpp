#include "gtp/losses/identity.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gtp/common/error.hpp"

namespace gtp::losses {

Point identity_residual(const PhiFn& phi, std::span<const double> x, double t, double s,
                        double fd_step) {
  if (!(s > 0.0)) throw DomainError("identity_residual: requires s > 0 (the identity has a 1/s factor)");
  if (!(s < t)) throw DomainError("identity_residual: requires s < t");
  const std::size_t d = x.size();
  const Point inst = phi(x, t, t);
  const Point val = phi(x, t, s);

  Point f(d);
  for (std::size_t k = 0; k < d; ++k) f[k] = (x[k] - inst[k]) / t;

  // Directional derivative of phi along f in x.
  Point xp(x.begin(), x.end()), xm(x.begin(), x.end());
  for (std::size_t k = 0; k < d; ++k) {
    xp[k] += fd_step * f[k];
    xm[k] -= fd_step * f[k];
  }
  const Point px = phi(xp, t, s);
  const Point mx = phi(xm, t, s);

  const double ht = std::min(fd_step, 0.5 * (t - s));
  const Point pt = phi(x, t + ht, s);
  const Point mt = phi(x, t - ht, s);

  const double factor = t * t / s - t;
  Point r(d);
  for (std::size_t k = 0; k < d; ++k) {
    const double jvp = (px[k] - mx[k]) / (2.0 * fd_step);
    const double dt = (pt[k] - mt[k]) / (2.0 * ht);
    r[k] = val[k] - (inst[k] - factor * (jvp + dt));
  }
  return r;
}

PhiFn constant_field_phi(Point c) {
  return [c = std::move(c)](std::span<const double> x, double t, double) {
    Point out(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) out[k] = x[k] - t * c[k];
    return out;
  };
}

PhiFn linear_field_phi() {
  return [](std::span<const double> x, double t, double s) {
    // t/(t-s) (e^(s-t) - 1) -> -t as s -> t.
    const double g = (s == t) ? -t : t / (t - s) * std::expm1(s - t);
    Point out(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) out[k] = x[k] + g * x[k];
    return out;
  };
}

PhiFn corrupted_phi(PhiFn base) {
  return [base = std::move(base)](std::span<const double> x, double t, double s) {
    Point out = base(x, t, s);
    for (auto& v : out) v += 0.1 * (t - s) * (t - s);
    return out;
  };
}

IdentityCheck check_identity(const PhiFn& phi, std::size_t dim, std::size_t samples, Rng& rng,
                             double tolerance) {
  if (samples == 0) throw ConfigError("check_identity: samples must be >= 1");
  if (dim == 0) throw ConfigError("check_identity: dim must be >= 1");
  IdentityCheck out;
  out.samples = samples;
  Point x(dim);
  for (std::size_t i = 0; i < samples; ++i) {
    for (auto& v : x) v = rng.uniform(-2.0, 2.0);
    const double t = rng.uniform(0.2, 2.0);
    const double s = t * rng.uniform(0.1, 0.9);
    const Point r = identity_residual(phi, x, t, s);
    double n2 = 0.0;
    for (double v : r) n2 += v * v;
    out.max_residual = std::max(out.max_residual, std::sqrt(n2));
  }
  out.pass = out.max_residual <= tolerance;
  return out;
}

}  // namespace gtp::losses
