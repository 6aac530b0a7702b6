#pragma once

namespace condgen {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace condgen
