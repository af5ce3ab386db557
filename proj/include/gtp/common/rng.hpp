#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>

namespace gtp {

/// Counter-based generator: the n-th draw is a SplitMix64 hash of (key, n).
///
/// Child streams are derived from the key alone, so a stream's contents never
/// depend on how many numbers were drawn from its parent. All training and
/// evaluation randomness is derived from one master seed this way.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) noexcept;

  static Rng from_state(std::uint64_t key, std::uint64_t counter) noexcept;

  /// Independent child stream identified by `id`.
  [[nodiscard]] Rng split(std::uint64_t id) const noexcept;
  [[nodiscard]] Rng split(std::initializer_list<std::uint64_t> path) const noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept;
  /// Standard normal via Box-Muller (no cached second value).
  double normal() noexcept;
  /// Uniform integer in [0, n); n must be > 0.
  std::size_t index(std::size_t n) noexcept;

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

  friend bool operator==(const Rng&, const Rng&) = default;

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Stream tags used by the trainer and the CLI.
namespace stream {
inline constexpr std::uint64_t init = 1;
inline constexpr std::uint64_t batch = 2;
inline constexpr std::uint64_t critic_target = 3;
inline constexpr std::uint64_t value = 4;
inline constexpr std::uint64_t actor = 5;
inline constexpr std::uint64_t ablation = 6;
inline constexpr std::uint64_t eval = 7;
inline constexpr std::uint64_t data = 8;
inline constexpr std::uint64_t diag = 9;
inline constexpr std::uint64_t sample = 10;
}  // namespace stream

}  // namespace gtp
