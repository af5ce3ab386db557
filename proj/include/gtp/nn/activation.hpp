#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace gtp::nn {

enum class Activation { mish, relu, tanh };

std::string to_string(Activation a);
Activation parse_activation(std::string_view name);

}  // namespace gtp::nn
