#pragma once

namespace dreb {

inline constexpr const char* kToolName = "dreb";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace dreb
