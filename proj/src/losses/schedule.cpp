#include "gtp/losses/schedule.hpp"

#include <bit>
#include <string>

#include "gtp/common/error.hpp"

namespace gtp::losses {

namespace {
std::int64_t log2_ratio(const ScheduleSpec& s) {
  return std::countr_zero(static_cast<std::uint64_t>(s.s1 / s.s0));
}
}  // namespace

void ScheduleSpec::validate() const {
  if (s0 < 1 || s1 < s0) throw ConfigError("schedule: need 1 <= s0 <= s1");
  if (s1 % s0 != 0 || !std::has_single_bit(static_cast<std::uint64_t>(s1 / s0)))
    throw ConfigError("schedule: s1 / s0 must be a power of two");
  if (K_total < 1) throw ConfigError("schedule: K_total must be >= 1");
  if (phase_length() < 1)
    throw ConfigError("schedule: K_total too small for the doubling phases (K' would be 0)");
}

std::int64_t ScheduleSpec::phase_length() const { return K_total / (log2_ratio(*this) + 1); }

std::int64_t step_schedule(const ScheduleSpec& spec, std::int64_t k) {
  spec.validate();
  if (k < 0 || k >= spec.K_total)
    throw ConfigError("step_schedule: iteration " + std::to_string(k) + " outside [0, " +
                      std::to_string(spec.K_total) + ")");
  const std::int64_t phase = k / spec.phase_length();
  // Once the phase reaches log2(s1/s0) the cap binds; avoid shifting past 63 bits.
  if (phase >= log2_ratio(spec)) return spec.s1 + 1;
  return std::min(spec.s0 << phase, spec.s1) + 1;
}

TimeTriple sample_time_triple(const ode::TimeGrid& grid, Rng& rng) {
  const std::size_t n = grid.points.size();
  if (n < 2) throw ConfigError("sample_time_triple: grid needs at least two positive points");
  const std::size_t i = rng.index(n - 1);
  TimeTriple tr{grid.points[i], grid.points[i + 1], 0.0};
  // Candidates: points[i+2 .. n-1] and the appended 0.
  const std::size_t candidates = n - (i + 2) + 1;
  const std::size_t j = rng.index(candidates);
  tr.tau = (i + 2 + j < n) ? grid.points[i + 2 + j] : 0.0;
  return tr;
}

}  // namespace gtp::losses
