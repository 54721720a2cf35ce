#pragma once

namespace aigi {

inline constexpr const char* kToolName = "aigi-eval";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace aigi
