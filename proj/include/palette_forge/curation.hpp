#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "palette_forge/image.hpp"

namespace palette_forge {

namespace detail {
__extension__ typedef __int128 Int128;
__extension__ typedef unsigned __int128 UInt128;
}  // namespace detail

inline constexpr std::size_t kRgbBinsPerChannel = 8;
inline constexpr std::size_t kRgbBins = kRgbBinsPerChannel * kRgbBinsPerChannel * kRgbBinsPerChannel;

/// floor(c / 255 * 8) clamped to 7 per channel, flattened as (r * 8 + g) * 8 + b.
constexpr std::uint32_t rgb_bin_of(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  const auto q = [](std::uint8_t c) { return std::min<std::uint32_t>(c * 8u / 255u, 7u); };
  return (q(r) * 8u + q(g)) * 8u + q(b);
}

/// Aggregate of per-image normalized 8x8x8 RGB histograms.
struct CorpusStats {
  std::array<double, kRgbBins> bin_counts{};  // summed per-image mass
  std::uint64_t image_count = 0;

  /// bin_counts / their total.
  std::array<double, kRgbBins> per_bin_share() const;
};

/// Order-independent accumulator for corpus scans.
///
/// Each image contributes count_b / N per bin, rounded once to a 2^-62 fixed-point grid and
/// added as an integer, so merging partial scans gives bit-identical results in any order.
class CorpusAccumulator {
 public:
  void add(const Image& image);
  void merge(const CorpusAccumulator& other);
  std::uint64_t image_count() const { return images_; }

  /// Throws Error when no image was added.
  CorpusStats stats() const;

 private:
  std::array<detail::Int128, kRgbBins> fixed_{};
  std::uint64_t images_ = 0;
};

struct SkippedImage {
  std::string id;
  std::string reason;
};

struct CorpusScan {
  CorpusStats stats;
  std::vector<SkippedImage> skipped;  // in input order
};

/// Decodes and scans `paths` in parallel; undecodable files are skipped and reported.
/// Throws Error when no image could be decoded.
CorpusScan scan_corpus(const std::vector<std::string>& paths, unsigned threads = 0,
                       const std::function<Image(const std::string&)>& decode = read_image);

/// Scans already decoded images.
CorpusStats scan_corpus(const std::vector<Image>& images, unsigned threads = 0);

struct RankedBin {
  std::uint32_t bin = 0;
  double share = 0.0;
};

struct BinRanking {
  std::vector<RankedBin> bins;    // descending by share, ties by ascending bin index
  std::vector<double> cumulative; // cumulative[i] = share of the first i+1 bins

  /// Cumulative share of the k most populated bins.
  double top_share(std::size_t k) const;
  /// Share of the k least populated bins.
  double bottom_share(std::size_t k) const;
};

BinRanking rank_bins(const CorpusStats& stats);

struct RareBinSet {
  std::vector<std::uint32_t> bins;  // ascending by share
  double share_covered = 0.0;

  bool contains(std::uint32_t bin) const;
};

/// The k least populated bins.
RareBinSet rarest_bins(const BinRanking& ranking, std::size_t k);

/// Fraction of pixels whose RGB bin is in the rare set.
double rare_fraction(const Image& image, const RareBinSet& rare);

struct SelectedImage {
  std::string id;
  double rare_fraction = 0.0;
};

struct CurationSelection {
  std::vector<SelectedImage> selected;  // input order
};

/// Keeps images whose rare-pixel fraction is >= tau.
CurationSelection select_rare_images(const std::vector<std::pair<std::string, Image>>& candidates,
                                     const RareBinSet& rare, double tau = 0.05, unsigned threads = 0);

/// Streaming variant over files; undecodable files are reported in `skipped`.
CurationSelection select_rare_images(const std::vector<std::string>& paths, const RareBinSet& rare, double tau,
                                     unsigned threads, std::vector<SkippedImage>* skipped);

}  // namespace palette_forge
