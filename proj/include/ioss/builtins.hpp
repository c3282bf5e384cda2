#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ioss/grid.hpp"
#include "ioss/system.hpp"

namespace ioss {

/// reactor, scalar_linear, zero, sine
std::vector<std::string> builtin_names();

/// Model text of a builtin, in the model-file grammar.
std::string_view builtin_source(std::string_view name);
SystemSpec builtin_model(std::string_view name);

/// Box the builtin is usually examined on, `count` points per axis.
/// reactor: [0.1,0.5]^2 x [-0.1,0.1]^3; the others [-1,1] per axis.
GridSpec builtin_grid(std::string_view name, std::uint64_t count);

}  // namespace ioss
