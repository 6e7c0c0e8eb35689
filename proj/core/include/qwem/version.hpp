#pragma once

namespace qwem {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace qwem
