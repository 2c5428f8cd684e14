#pragma once

namespace rpe {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace rpe
