#pragma once

namespace basinlab {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace basinlab
