#pragma once

namespace organic {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace organic
