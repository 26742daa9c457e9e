#pragma once

namespace slrbm {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace slrbm
