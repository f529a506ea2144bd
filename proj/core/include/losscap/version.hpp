#pragma once

#include <string_view>

namespace losscap {

inline constexpr std::string_view k_version = "0.1.0";

}  // namespace losscap
