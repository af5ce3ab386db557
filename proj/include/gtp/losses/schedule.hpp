#pragma once

#include <cstdint>

#include "gtp/common/rng.hpp"
#include "gtp/ode/solvers.hpp"

namespace gtp::losses {

/// Curriculum for the number of grid points: starts at s0 + 1 and doubles
/// every phase_length() iterations until it reaches s1 + 1.
struct ScheduleSpec {
  std::int64_t s0 = 10;
  std::int64_t s1 = 1280;
  std::int64_t K_total = 20000;

  void validate() const;
  /// K' = floor(K_total / (log2(s1 / s0) + 1)).
  std::int64_t phase_length() const;

  friend bool operator==(const ScheduleSpec&, const ScheduleSpec&) = default;
};

/// N(k) = min(s0 * 2^floor(k / K'), s1) + 1 for 0 <= k < K_total.
std::int64_t step_schedule(const ScheduleSpec& spec, std::int64_t k);

struct TimeTriple {
  double t;
  double u;
  double tau;
};

/// Picks t = points[i] uniformly over i in [0, n-2], u = points[i+1], and tau
/// uniformly among the grid points below u together with the 0 endpoint.
TimeTriple sample_time_triple(const ode::TimeGrid& grid, Rng& rng);

}  // namespace gtp::losses
