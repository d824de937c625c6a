#include "palette_forge/palette.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <tuple>

#include "palette_forge/error.hpp"
#include "random.hpp"
#include "summation.hpp"

namespace palette_forge {

namespace {

struct WeightedColor {
  std::array<double, 3> rgb;
  std::uint64_t count;
};

// Distinct colors with pixel counts, sorted lexicographically.
std::vector<WeightedColor> distinct_colors(std::span<const ColorRgb> pixels) {
  std::vector<std::array<double, 3>> sorted;
  sorted.reserve(pixels.size());
  for (const auto& p : pixels) sorted.push_back({p.r, p.g, p.b});
  std::sort(sorted.begin(), sorted.end());

  std::vector<WeightedColor> out;
  for (const auto& c : sorted) {
    if (!out.empty() && out.back().rgb == c) {
      ++out.back().count;
    } else {
      out.push_back({c, 1});
    }
  }
  return out;
}

ColorRgb to_rgb(const std::array<double, 3>& c) { return {c[0], c[1], c[2]}; }

double squared_distance(const std::array<double, 3>& x, const std::array<double, 3>& y) {
  const double dr = x[0] - y[0];
  const double dg = x[1] - y[1];
  const double db = x[2] - y[2];
  return dr * dr + dg * dg + db * db;
}

struct Box {
  std::vector<WeightedColor> entries;
  std::uint64_t pixels = 0;

  std::array<double, 3> lo() const {
    std::array<double, 3> out{1e300, 1e300, 1e300};
    for (const auto& e : entries) {
      for (int c = 0; c < 3; ++c) out[c] = std::min(out[c], e.rgb[c]);
    }
    return out;
  }

  std::array<double, 3> hi() const {
    std::array<double, 3> out{-1e300, -1e300, -1e300};
    for (const auto& e : entries) {
      for (int c = 0; c < 3; ++c) out[c] = std::max(out[c], e.rgb[c]);
    }
    return out;
  }

  // Largest channel range and the channel it belongs to (R > G > B on ties).
  std::pair<double, int> widest() const {
    const auto l = lo();
    const auto h = hi();
    int best = 0;
    for (int c = 1; c < 3; ++c) {
      if (h[c] - l[c] > h[best] - l[best]) best = c;
    }
    return {h[best] - l[best], best};
  }

  ColorRgb mean() const {
    std::array<double, 3> sum{};
    for (const auto& e : entries) {
      for (int c = 0; c < 3; ++c) sum[c] += e.rgb[c] * static_cast<double>(e.count);
    }
    const auto l = lo();
    const auto h = hi();
    std::array<double, 3> m{};
    for (int c = 0; c < 3; ++c) m[c] = std::clamp(sum[c] / static_cast<double>(pixels), l[c], h[c]);
    return to_rgb(m);
  }
};

std::pair<Box, Box> split_box(Box box, int channel) {
  auto& e = box.entries;
  std::sort(e.begin(), e.end(), [channel](const WeightedColor& x, const WeightedColor& y) {
    return std::tie(x.rgb[channel], x.rgb) < std::tie(y.rgb[channel], y.rgb);
  });

  // Value of the median pixel, 0-based index (N-1)/2.
  const std::uint64_t median_rank = (box.pixels - 1) / 2;
  std::uint64_t seen = 0;
  double median = e.back().rgb[channel];
  for (const auto& entry : e) {
    seen += entry.count;
    if (seen > median_rank) {
      median = entry.rgb[channel];
      break;
    }
  }

  // Lower half gets the median pixel unless that would leave the upper half empty.
  const double max_value = e.back().rgb[channel];
  auto goes_low = [&](const WeightedColor& x) {
    return median < max_value ? x.rgb[channel] <= median : x.rgb[channel] < median;
  };

  Box low;
  Box high;
  for (auto& entry : e) {
    Box& target = goes_low(entry) ? low : high;
    target.pixels += entry.count;
    target.entries.push_back(entry);
  }
  return {std::move(low), std::move(high)};
}

template <typename Item>
Palette ordered_by_mass(std::vector<std::pair<std::uint64_t, Item>> items) {
  std::stable_sort(items.begin(), items.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
  Palette out;
  for (auto& [mass, color] : items) out.colors.push_back(color);
  return out;
}

}  // namespace

void Palette::validate() const {
  if (colors.empty()) throw Error("palette must contain at least one color");
  for (const auto& c : colors) {
    for (double ch : {c.r, c.g, c.b}) {
      if (!(ch >= 0.0 && ch <= 1.0)) throw Error("palette channels must lie in [0,1]");
    }
  }
  if (weights) {
    if (weights->size() != colors.size()) throw Error("palette weights must match the number of colors");
    for (double w : *weights) {
      if (!(std::isfinite(w) && w > 0.0)) throw Error("palette weights must be positive");
    }
    if (std::abs(detail::compensated_sum(*weights) - 1.0) > kNormalizationTolerance) {
      throw Error("palette weights must sum to 1");
    }
  }
}

HsvHistogram palette_to_histogram(const Palette& palette, const HistogramDims& dims) {
  palette.validate();
  std::vector<double> mass(dims.size(), 0.0);
  const double uniform = 1.0 / static_cast<double>(palette.size());
  // Accumulate per bin in color order; collisions are summed.
  for (std::size_t i = 0; i < palette.size(); ++i) {
    const double w = palette.weights ? (*palette.weights)[i] : uniform;
    mass[bin_of(rgb_to_hsv(palette.colors[i]), dims).flat] += w;
  }
  return normalize(HsvHistogram(dims, std::move(mass)));
}

Palette extract_median_cut(std::span<const ColorRgb> pixels, int k) {
  if (pixels.empty()) throw Error("empty input");
  if (k < 1 || k > kMaxExtractedColors) throw Error("median cut supports 1 to 8 colors");

  std::vector<Box> boxes(1);
  boxes[0].entries = distinct_colors(pixels);
  boxes[0].pixels = pixels.size();

  while (boxes.size() < static_cast<std::size_t>(k)) {
    std::size_t chosen = boxes.size();
    double widest_range = 0.0;
    int channel = 0;
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      const auto [range, ch] = boxes[i].widest();
      if (range > widest_range) {
        widest_range = range;
        chosen = i;
        channel = ch;
      }
    }
    if (chosen == boxes.size()) break;  // every box holds a single distinct color
    auto [low, high] = split_box(std::move(boxes[chosen]), channel);
    boxes[chosen] = std::move(low);
    boxes.push_back(std::move(high));
  }

  std::vector<std::pair<std::uint64_t, ColorRgb>> items;
  for (const auto& box : boxes) items.emplace_back(box.pixels, box.mean());
  return ordered_by_mass(std::move(items));
}

Palette extract_kmeans(std::span<const ColorRgb> pixels, const KMeansOptions& options) {
  if (pixels.empty()) throw Error("empty input");
  if (options.k < 1) throw Error("k-means needs k >= 1");

  const auto points = distinct_colors(pixels);
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(options.k), points.size());
  std::mt19937_64 rng(options.seed);

  // Pick index by walking cumulative weights.
  auto pick = [&](const std::vector<double>& weights) {
    const double total = detail::compensated_sum(weights);
    const double target = detail::uniform01(rng) * total;
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] <= 0.0) continue;
      last_positive = i;
      acc += weights[i];
      if (acc > target) return i;
    }
    return last_positive;
  };

  // k-means++ seeding over pixels (distinct colors weighted by count).
  std::vector<std::array<double, 3>> centers;
  std::vector<double> weights(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) weights[i] = static_cast<double>(points[i].count);
  centers.push_back(points[pick(weights)].rgb);
  std::vector<double> nearest(points.size(), std::numeric_limits<double>::infinity());
  while (centers.size() < k) {
    for (std::size_t i = 0; i < points.size(); ++i) {
      nearest[i] = std::min(nearest[i], squared_distance(points[i].rgb, centers.back()));
      weights[i] = static_cast<double>(points[i].count) * nearest[i];
    }
    centers.push_back(points[pick(weights)].rgb);
  }

  std::vector<std::size_t> assignment(points.size(), 0);
  auto assign = [&] {
    for (std::size_t i = 0; i < points.size(); ++i) {
      std::size_t best = 0;
      double best_d = squared_distance(points[i].rgb, centers[0]);
      for (std::size_t c = 1; c < k; ++c) {
        const double d = squared_distance(points[i].rgb, centers[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      assignment[i] = best;
    }
  };

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    assign();
    std::vector<std::array<double, 3>> sums(k, {0.0, 0.0, 0.0});
    std::vector<std::uint64_t> mass(k, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto c = assignment[i];
      for (int ch = 0; ch < 3; ++ch) sums[c][ch] += points[i].rgb[ch] * static_cast<double>(points[i].count);
      mass[c] += points[i].count;
    }

    double max_move = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      std::array<double, 3> next;
      if (mass[c] == 0) {
        // Reseed to the point farthest from its own centroid.
        std::size_t far = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
          const double d = squared_distance(points[i].rgb, centers[assignment[i]]);
          if (d > far_d) {
            far_d = d;
            far = i;
          }
        }
        next = points[far].rgb;
        assignment[far] = c;
      } else {
        for (int ch = 0; ch < 3; ++ch) next[ch] = sums[c][ch] / static_cast<double>(mass[c]);
      }
      max_move = std::max(max_move, std::sqrt(squared_distance(next, centers[c])));
      centers[c] = next;
    }
    if (max_move < options.tolerance) break;
  }

  assign();
  std::vector<std::uint64_t> mass(k, 0);
  for (std::size_t i = 0; i < points.size(); ++i) mass[assignment[i]] += points[i].count;
  std::vector<std::pair<std::uint64_t, ColorRgb>> items;
  for (std::size_t c = 0; c < k; ++c) items.emplace_back(mass[c], to_rgb(centers[c]));
  return ordered_by_mass(std::move(items));
}

}  // namespace palette_forge
