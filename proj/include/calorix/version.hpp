#pragma once

namespace calorix {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace calorix
