#pragma once

// Checkpoint layout (little-endian, see nn/serialize.hpp for records):
//
//   8 bytes magic "GTPCKPT\0", u32 version
//   u64 n, n bytes config text
//   u64 iteration, u64 rng key, u64 rng counter
//   environment: u64 n_goals, f64 goals[2 n], f64 step_scale, u64 horizon,
//     f64 goal_radius, u32 reward_mode, u64 preferred_goal, f64 other_goal_reward,
//     f64 start_half_width
//   f64 state mean[2], f64 state std[2]
//   actor: u64 state_dim, u64 action_dim, f64 T, t_min, rho, sigma_data, skip_sigma, action_bound,
//     online and EMA parameter records
//   critic: four parameter records (online 0, online 1, target 0, target 1)
//   Adam: actor, critic 0, critic 1

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "gtp/train/trainer.hpp"

namespace gtp::train {

inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(std::ostream& os, const TrainState& state);
/// Throws ParseError on a bad magic, a version mismatch or truncation.
TrainState read_checkpoint(std::istream& is);

/// Writes to a temporary sibling and renames it into place.
void save_checkpoint(const std::filesystem::path& path, const TrainState& state);
TrainState load_checkpoint(const std::filesystem::path& path);

}  // namespace gtp::train
