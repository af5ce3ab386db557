#include "gtp/common/rng.hpp"

#include <cmath>
#include <numbers>

namespace gtp {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed) noexcept : key_(splitmix64(seed ^ 0x5851F42D4C957F2DULL)) {}

Rng Rng::from_state(std::uint64_t key, std::uint64_t counter) noexcept {
  Rng r;
  r.key_ = key;
  r.counter_ = counter;
  return r;
}

Rng Rng::split(std::uint64_t id) const noexcept {
  Rng child;
  child.key_ = splitmix64(key_ ^ splitmix64(id * kGolden + 0x632BE59BD9B4E019ULL));
  child.counter_ = 0;
  return child;
}

Rng Rng::split(std::initializer_list<std::uint64_t> path) const noexcept {
  Rng r = *this;
  for (auto id : path) r = r.split(id);
  return r;
}

std::uint64_t Rng::next_u64() noexcept {
  ++counter_;
  return splitmix64(key_ + counter_ * kGolden);
}

double Rng::uniform() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

double Rng::normal() noexcept {
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t Rng::index(std::size_t n) noexcept {
  const unsigned __int128 wide = static_cast<unsigned __int128>(next_u64()) * n;
  return static_cast<std::size_t>(wide >> 64);
}

}  // namespace gtp
