#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "palette_forge/colorspace.hpp"
#include "palette_forge/histogram.hpp"

namespace palette_forge {

inline constexpr int kMaxExtractedColors = 8;

/// Ordered colors with optional per-color weights (positive, summing to one).
struct Palette {
  std::vector<ColorRgb> colors;
  std::optional<std::vector<double>> weights;

  std::size_t size() const { return colors.size(); }
  /// Throws Error when empty, when weights mismatch in length, or do not sum to one.
  void validate() const;

  friend bool operator==(const Palette&, const Palette&) = default;
};

/// Each color contributes its weight (default 1/k) to its bin; collisions add up.
HsvHistogram palette_to_histogram(const Palette& palette, const HistogramDims& dims = kDefaultDims);

/// Median cut in RGB. Produces min(k, distinct colors) colors ordered by descending pixel count.
Palette extract_median_cut(std::span<const ColorRgb> pixels, int k = kMaxExtractedColors);

struct KMeansOptions {
  int k = 5;
  std::uint64_t seed = 0;
  int max_iterations = 100;
  double tolerance = 1e-4;  // stop once no centroid moves further than this
};

/// k-means++ seeded Lloyd iterations in RGB. Centroids are ordered by descending cluster mass.
Palette extract_kmeans(std::span<const ColorRgb> pixels, const KMeansOptions& options = {});

}  // namespace palette_forge
