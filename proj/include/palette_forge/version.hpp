#pragma once

#include <cstdint>

namespace palette_forge {

inline constexpr const char* kVersion = "0.1.0";

inline constexpr std::uint16_t kHistogramFormatVersion = 1;  // PHST
inline constexpr std::uint16_t kConditionFormatVersion = 1;  // PCND

}  // namespace palette_forge
