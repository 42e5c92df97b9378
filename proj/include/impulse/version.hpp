#pragma once

namespace impulse {
inline constexpr const char* kVersion = "0.1.0";
}
