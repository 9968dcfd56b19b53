#pragma once

namespace dilab {
inline constexpr const char* kVersion = "0.1.0";
}
