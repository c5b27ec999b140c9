#pragma once

namespace riskenv {

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace riskenv
