#pragma once

namespace mdm {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace mdm
