#pragma once

// Shared generators and independent oracles for the unit and acceptance suites.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "palette_forge/colorspace.hpp"
#include "palette_forge/curation.hpp"
#include "palette_forge/histogram.hpp"
#include "palette_forge/image.hpp"

namespace fixtures {

using namespace palette_forge;

struct SharmaPair {
  ColorLab x;
  ColorLab y;
  double delta_e;  // published to four decimals
};

// Sharma, Wu and Dalal (2005) CIEDE2000 test data, all 34 pairs.
inline const std::array<SharmaPair, 34>& sharma_pairs() {
  static const std::array<SharmaPair, 34> pairs = {{
      {{50.0000, 2.6772, -79.7751}, {50.0000, 0.0000, -82.7485}, 2.0425},
      {{50.0000, 3.1571, -77.2803}, {50.0000, 0.0000, -82.7485}, 2.8615},
      {{50.0000, 2.8361, -74.0200}, {50.0000, 0.0000, -82.7485}, 3.4412},
      {{50.0000, -1.3802, -84.2814}, {50.0000, 0.0000, -82.7485}, 1.0000},
      {{50.0000, -1.1848, -84.8006}, {50.0000, 0.0000, -82.7485}, 1.0000},
      {{50.0000, -0.9009, -85.5211}, {50.0000, 0.0000, -82.7485}, 1.0000},
      {{50.0000, 0.0000, 0.0000}, {50.0000, -1.0000, 2.0000}, 2.3669},
      {{50.0000, -1.0000, 2.0000}, {50.0000, 0.0000, 0.0000}, 2.3669},
      {{50.0000, 2.4900, -0.0010}, {50.0000, -2.4900, 0.0009}, 7.1792},
      {{50.0000, 2.4900, -0.0010}, {50.0000, -2.4900, 0.0010}, 7.1792},
      {{50.0000, 2.4900, -0.0010}, {50.0000, -2.4900, 0.0011}, 7.2195},
      {{50.0000, 2.4900, -0.0010}, {50.0000, -2.4900, 0.0012}, 7.2195},
      {{50.0000, -0.0010, 2.4900}, {50.0000, 0.0009, -2.4900}, 4.8045},
      {{50.0000, -0.0010, 2.4900}, {50.0000, 0.0010, -2.4900}, 4.8045},
      {{50.0000, -0.0010, 2.4900}, {50.0000, 0.0011, -2.4900}, 4.7461},
      {{50.0000, 2.5000, 0.0000}, {50.0000, 0.0000, -2.5000}, 4.3065},
      {{50.0000, 2.5000, 0.0000}, {73.0000, 25.0000, -18.0000}, 27.1492},
      {{50.0000, 2.5000, 0.0000}, {61.0000, -5.0000, 29.0000}, 22.8977},
      {{50.0000, 2.5000, 0.0000}, {56.0000, -27.0000, -3.0000}, 31.9030},
      {{50.0000, 2.5000, 0.0000}, {58.0000, 24.0000, 15.0000}, 19.4535},
      {{50.0000, 2.5000, 0.0000}, {50.0000, 3.1736, 0.5854}, 1.0000},
      {{50.0000, 2.5000, 0.0000}, {50.0000, 3.2972, 0.0000}, 1.0000},
      {{50.0000, 2.5000, 0.0000}, {50.0000, 1.8634, 0.5757}, 1.0000},
      {{50.0000, 2.5000, 0.0000}, {50.0000, 3.2592, 0.3350}, 1.0000},
      {{60.2574, -34.0099, 36.2677}, {60.4626, -34.1751, 39.4387}, 1.2644},
      {{63.0109, -31.0961, -5.8663}, {62.8187, -29.7946, -4.0864}, 1.2630},
      {{61.2901, 3.7196, -5.3901}, {61.4294, 2.2480, -4.9620}, 1.8731},
      {{35.0831, -44.1164, 3.7933}, {35.0232, -40.0716, 1.5901}, 1.8645},
      {{22.7233, 20.0904, -46.6940}, {23.0331, 14.9730, -42.5619}, 2.0373},
      {{36.4612, 47.8580, 18.3852}, {36.2715, 50.5065, 21.2231}, 1.4146},
      {{90.8027, -2.0831, 1.4410}, {91.1528, -1.6435, 0.0447}, 1.4441},
      {{90.9257, -0.5406, -0.9208}, {88.6381, -0.8985, -0.7239}, 1.5381},
      {{6.7747, -0.2908, -2.4247}, {5.8714, -0.0985, -2.2286}, 0.6377},
      {{2.0776, 0.0795, -1.1350}, {0.9033, -0.0636, -0.5514}, 0.9082},
  }};
  return pairs;
}

inline ColorLab random_lab(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> L(0.0, 100.0);
  std::uniform_real_distribution<double> ab(-100.0, 100.0);
  return {L(rng), ab(rng), ab(rng)};
}

/// Normalized histogram with 1..max_bins random bins and random positive masses.
inline HsvHistogram random_sparse_histogram(std::mt19937_64& rng, std::size_t max_bins,
                                            const HistogramDims& dims = kDefaultDims) {
  std::uniform_int_distribution<std::size_t> count(1, max_bins);
  std::uniform_int_distribution<std::uint32_t> bin(0, static_cast<std::uint32_t>(dims.size() - 1));
  std::uniform_real_distribution<double> weight(0.05, 1.0);
  std::vector<double> mass(dims.size(), 0.0);
  const std::size_t n = count(rng);
  for (std::size_t i = 0; i < n; ++i) mass[bin(rng)] += weight(rng);
  return normalize(HsvHistogram(dims, std::move(mass)));
}

/// Same as random_sparse_histogram, but masses are multiples of 1/denominator.
inline HsvHistogram random_rational_histogram(std::mt19937_64& rng, std::size_t bins, int denominator,
                                              const HistogramDims& dims = kDefaultDims) {
  std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(dims.size() - 1));
  std::vector<double> mass(dims.size(), 0.0);
  std::uniform_int_distribution<std::size_t> which(0, bins - 1);
  std::vector<std::uint32_t> chosen;
  while (chosen.size() < bins) {
    const auto b = pick(rng);
    if (std::find(chosen.begin(), chosen.end(), b) == chosen.end()) chosen.push_back(b);
  }
  for (int unit = 0; unit < denominator; ++unit) mass[chosen[which(rng)]] += 1.0;
  for (auto& m : mass) m /= denominator;
  return HsvHistogram(dims, std::move(mass));
}

inline Image checkerboard(int w, int h, int cell, std::array<std::uint8_t, 3> a, std::array<std::uint8_t, 3> b) {
  Image img(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto& c = ((x / cell + y / cell) % 2 == 0) ? a : b;
      img.set(x, y, c[0], c[1], c[2]);
    }
  }
  return img;
}

inline Image random_image(std::mt19937_64& rng, int w, int h) {
  Image img(w, h);
  std::uniform_int_distribution<int> byte(0, 255);
  for (auto& v : img.rgb) v = static_cast<std::uint8_t>(byte(rng));
  return img;
}

/// Brute-force OT oracle for a transport problem with exactly two targets.
///
/// Every feasible plan is fixed by t_i, the mass source i sends to target 0. The objective
/// is sum_i t_i (c_i0 - c_i1) + const, so the optimum fills target 0 with the sources of
/// smallest cost difference first (a fractional knapsack). Returns the optimal cost.
inline double two_target_ot(const std::vector<double>& supply, const std::array<double, 2>& demand,
                            const std::vector<std::array<double, 2>>& cost) {
  std::vector<std::size_t> order(supply.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return cost[a][0] - cost[a][1] < cost[b][0] - cost[b][1];
  });
  double remaining = demand[0];
  double total = 0.0;
  for (auto i : order) {
    const double t = std::min(supply[i], remaining);
    remaining -= t;
    total += t * cost[i][0] + (supply[i] - t) * cost[i][1];
  }
  return total;
}

/// The 8-bit channel value at the middle of RGB curation bin q (0..7).
inline std::uint8_t rgb_bin_value(std::uint32_t q) {
  const std::uint8_t v = static_cast<std::uint8_t>((255u * q + 255u * (q + 1)) / 16u);
  return v;
}

inline std::array<std::uint8_t, 3> rgb_bin_color(std::uint32_t bin) {
  return {rgb_bin_value(bin / 64), rgb_bin_value((bin / 8) % 8), rgb_bin_value(bin % 8)};
}

/// Planted corpus for the curation suite.
///
/// Every image has 1000 pixels. 870 land in the 100 "common" bins (8 or 9 per bin), 130 in
/// the remaining bins. The first `rare_images` images put 60 of their 130 other pixels into
/// the 20 "rare" bins; every other image avoids the rare bins completely.
struct PlantedCorpus {
  std::vector<std::uint32_t> common;  // 100 designated bins
  std::vector<std::uint32_t> rare;    // 20 bins only the rare images touch
  std::vector<Image> images;
  std::vector<bool> is_rare_image;
};

inline PlantedCorpus planted_corpus(std::uint64_t seed, std::size_t image_count, std::size_t rare_images) {
  std::mt19937_64 rng(seed);
  std::vector<std::uint32_t> all(kRgbBins);
  std::iota(all.begin(), all.end(), 0u);
  std::shuffle(all.begin(), all.end(), rng);
  PlantedCorpus corpus;
  corpus.common.assign(all.begin(), all.begin() + 100);
  corpus.rare.assign(all.begin() + 100, all.begin() + 120);
  const std::vector<std::uint32_t> filler(all.begin() + 120, all.end());

  for (std::size_t n = 0; n < image_count; ++n) {
    std::vector<std::uint32_t> pixels;
    // 870 common pixels: 70 bins with 9, 30 bins with 8, rotated per image.
    for (std::size_t i = 0; i < 100; ++i) {
      const std::size_t reps = ((i + n) % 100) < 70 ? 9 : 8;
      for (std::size_t r = 0; r < reps; ++r) pixels.push_back(corpus.common[i]);
    }
    const bool rare_image = n < rare_images;
    std::uniform_int_distribution<std::size_t> pick_filler(0, filler.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_rare(0, corpus.rare.size() - 1);
    for (std::size_t i = 0; i < 130; ++i) {
      pixels.push_back(rare_image && i < 60 ? corpus.rare[pick_rare(rng)] : filler[pick_filler(rng)]);
    }
    std::shuffle(pixels.begin(), pixels.end(), rng);
    Image img(40, 25);
    for (std::size_t i = 0; i < pixels.size(); ++i) {
      const auto c = rgb_bin_color(pixels[i]);
      img.set(static_cast<int>(i % 40), static_cast<int>(i / 40), c[0], c[1], c[2]);
    }
    corpus.images.push_back(std::move(img));
    corpus.is_rare_image.push_back(rare_image);
  }
  return corpus;
}

/// Fresh scratch directory under the system temp path.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("palette_forge_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fixtures
