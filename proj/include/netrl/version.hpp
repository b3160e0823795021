#pragma once

namespace netrl {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace netrl
