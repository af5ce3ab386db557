#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string_view>

#include "gtp/common/matrix.hpp"
#include "gtp/common/rng.hpp"

namespace gtp::losses {

/// phi(x, t, s); must also accept s == t (the instantaneous map).
using PhiFn = std::function<Point(std::span<const double> x, double t, double s)>;

/// Residual of the continuous-time identity
///   phi(x,t,s) = phi(x,t,t) - (t^2/s - t) (f . d_x phi + d_t phi),  f = (x - phi(x,t,t)) / t,
/// with both derivatives taken by central differences. Diagnostic only.
/// Throws DomainError unless 0 < s < t.
Point identity_residual(const PhiFn& phi, std::span<const double> x, double t, double s,
                        double fd_step = 1e-5);

/// Closed-form phi for dx/dt = c: phi(x, t, s) = x - t c.
PhiFn constant_field_phi(Point c);

/// Closed-form phi for dx/dt = x: phi(x, t, s) = x + t/(t - s) (e^(s-t) - 1) x,
/// with the s -> t limit x (1 - t).
PhiFn linear_field_phi();

/// Adds 0.1 (t - s)^2 to every component, which no flow map satisfies.
PhiFn corrupted_phi(PhiFn base);

struct IdentityCheck {
  double max_residual = 0.0;  // max over samples of the residual's L2 norm
  std::size_t samples = 0;
  bool pass = false;          // max_residual <= tolerance
};

/// Residual norms at random x in [-2, 2]^dim, t in [0.2, 2], s in [0.1 t, 0.9 t].
IdentityCheck check_identity(const PhiFn& phi, std::size_t dim, std::size_t samples, Rng& rng,
                             double tolerance = 1e-6);

}  // namespace gtp::losses
