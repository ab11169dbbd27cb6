#pragma once

namespace neuromap {
inline constexpr const char* kVersion = "0.1.0";
}
