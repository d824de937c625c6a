#pragma once

#include <cstdint>
#include <random>

namespace palette_forge::detail {

// Uniform double in [0,1) built from the top 53 bits, so draws are identical across
// standard libraries (std::uniform_real_distribution is implementation-defined).
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace palette_forge::detail
