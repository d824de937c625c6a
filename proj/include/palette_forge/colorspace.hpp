#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace palette_forge {

/// sRGB color with channels in [0,1].
struct ColorRgb {
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;

  friend bool operator==(const ColorRgb&, const ColorRgb&) = default;
};

/// Hue in degrees [0,360), saturation and value in [0,1].
struct ColorHsv {
  double h = 0.0;
  double s = 0.0;
  double v = 0.0;

  friend bool operator==(const ColorHsv&, const ColorHsv&) = default;
};

/// CIELAB under D65.
struct ColorLab {
  double L = 0.0;
  double a = 0.0;
  double b = 0.0;

  friend bool operator==(const ColorLab&, const ColorLab&) = default;
};

/// Clip level and sharpening exponent for the thresholded CIEDE2000 distance.
struct DistanceParams {
  double threshold = 20.0;        // clip level, in delta-E00 units
  double sharpen_exponent = 1.0;  // applied after clipping and rescaling to [0,1]

  /// Throws palette_forge::Error unless both fields are finite and positive.
  void validate() const;

  friend bool operator==(const DistanceParams&, const DistanceParams&) = default;
};

constexpr ColorRgb rgb_from_u8(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  return {r / 255.0, g / 255.0, b / 255.0};
}

/// Grayscale inputs map to h = 0, s = 0.
ColorHsv rgb_to_hsv(const ColorRgb& c);
ColorRgb hsv_to_rgb(const ColorHsv& c);

/// sRGB -> linear RGB -> XYZ (D65) -> CIELAB.
ColorLab rgb_to_lab(const ColorRgb& c);

/// CIEDE2000 color difference with kL = kC = kH = 1. Exactly symmetric in its arguments.
double ciede2000(const ColorLab& x, const ColorLab& y);

/// (min(dE00, T) / T) ^ gamma, always in [0,1].
double thresholded_distance(const ColorLab& x, const ColorLab& y, const DistanceParams& params);

/// "#RRGGBB", uppercase. Channels are rounded to the nearest 8-bit value.
std::string to_hex(const ColorRgb& c);

/// Parses "#RRGGBB" (case-insensitive). Throws FormatError on anything else.
ColorRgb parse_hex(std::string_view text);

}  // namespace palette_forge
