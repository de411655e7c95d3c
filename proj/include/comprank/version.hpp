#pragma once

#include <string_view>

namespace comprank {

inline constexpr std::string_view kToolName = "comprank";
inline constexpr std::string_view kVersion = "0.1.0";

}  // namespace comprank
