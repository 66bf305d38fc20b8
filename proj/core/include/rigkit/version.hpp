#pragma once

namespace rigkit {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace rigkit
