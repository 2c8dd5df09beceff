#pragma once

namespace ut {

inline constexpr const char* kToolVersion = "0.1.0";

} // namespace ut
