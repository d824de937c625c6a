#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "palette_forge/colorspace.hpp"
#include "palette_forge/histogram.hpp"

namespace palette_forge {

/// Interleaved 8-bit RGB, row-major.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  Image() = default;
  Image(int w, int h);
  /// Solid fill.
  Image(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b);

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }
  bool empty() const { return pixel_count() == 0; }

  ColorRgb pixel(int x, int y) const;
  void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b);

  /// Every pixel as a [0,1] color, row-major.
  std::vector<ColorRgb> pixels() const;

  friend bool operator==(const Image&, const Image&) = default;
};

/// Same result as histogram_of_image(image.pixels()), counted on the 8-bit data in parallel
/// chunks whose integer counts are merged.
HsvHistogram histogram_of_image(const Image& image, const HistogramDims& dims = kDefaultDims,
                                unsigned threads = 1);

/// Decodes PNG or JPEG (detected from the file signature). Alpha is discarded.
/// Throws IoError for unreadable files and FormatError for anything else.
Image read_image(const std::string& path);
void write_png(const std::string& path, const Image& image);

}  // namespace palette_forge
