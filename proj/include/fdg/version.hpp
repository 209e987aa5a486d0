#pragma once

namespace fdg {

inline constexpr const char* kToolName = "fdg";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace fdg
