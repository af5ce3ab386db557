#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "gtp/common/matrix.hpp"

namespace gtp {

/// Minibatch of transitions with normalized states (actions untouched).
struct Batch {
  Matrix states;
  Matrix actions;
  Matrix next_states;
  std::vector<double> rewards;
  std::vector<std::uint8_t> terminals;
  std::vector<std::size_t> indices;  // dataset rows the batch was drawn from

  std::size_t size() const { return rewards.size(); }
};

}  // namespace gtp
