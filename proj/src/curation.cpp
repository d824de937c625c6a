#include "palette_forge/curation.hpp"

#include <algorithm>
#include <optional>

#include "palette_forge/error.hpp"
#include "palette_forge/parallel.hpp"
#include "summation.hpp"

namespace palette_forge {

namespace {

constexpr int kFixedShift = 62;

std::array<std::uint64_t, kRgbBins> count_bins(const Image& image) {
  std::array<std::uint64_t, kRgbBins> counts{};
  for (std::size_t i = 0; i < image.pixel_count(); ++i) {
    ++counts[rgb_bin_of(image.rgb[3 * i], image.rgb[3 * i + 1], image.rgb[3 * i + 2])];
  }
  return counts;
}

}  // namespace

std::array<double, kRgbBins> CorpusStats::per_bin_share() const {
  const double total = detail::compensated_sum(bin_counts);
  std::array<double, kRgbBins> out{};
  if (!(total > 0.0)) return out;
  for (std::size_t b = 0; b < kRgbBins; ++b) out[b] = bin_counts[b] / total;
  return out;
}

void CorpusAccumulator::add(const Image& image) {
  if (image.empty()) throw Error("empty input");
  const auto counts = count_bins(image);
  const auto n = static_cast<detail::UInt128>(image.pixel_count());
  for (std::size_t b = 0; b < kRgbBins; ++b) {
    if (counts[b] == 0) continue;
    const detail::UInt128 scaled = (static_cast<detail::UInt128>(counts[b]) << kFixedShift) + n / 2;
    fixed_[b] += static_cast<detail::Int128>(scaled / n);
  }
  ++images_;
}

void CorpusAccumulator::merge(const CorpusAccumulator& other) {
  for (std::size_t b = 0; b < kRgbBins; ++b) fixed_[b] += other.fixed_[b];
  images_ += other.images_;
}

CorpusStats CorpusAccumulator::stats() const {
  if (images_ == 0) throw Error("corpus contains no decodable image");
  CorpusStats out;
  out.image_count = images_;
  const double unit = 0x1.0p-62;
  for (std::size_t b = 0; b < kRgbBins; ++b) out.bin_counts[b] = static_cast<double>(fixed_[b]) * unit;
  return out;
}

CorpusScan scan_corpus(const std::vector<std::string>& paths, unsigned threads,
                       const std::function<Image(const std::string&)>& decode) {
  const std::size_t workers = std::min<std::size_t>(resolve_threads(threads), std::max<std::size_t>(paths.size(), 1));
  std::vector<CorpusAccumulator> partial(workers);
  std::vector<std::optional<std::string>> failures(paths.size());
  parallel_chunks(paths.size(), static_cast<unsigned>(workers), [&](std::size_t begin, std::size_t end, std::size_t w) {
    for (std::size_t i = begin; i < end; ++i) {
      try {
        partial[w].add(decode(paths[i]));
      } catch (const std::exception& e) {
        failures[i] = e.what();
      }
    }
  });

  CorpusScan scan;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (failures[i]) scan.skipped.push_back({paths[i], *failures[i]});
  }
  for (std::size_t w = 1; w < partial.size(); ++w) partial[0].merge(partial[w]);
  scan.stats = partial[0].stats();
  return scan;
}

CorpusStats scan_corpus(const std::vector<Image>& images, unsigned threads) {
  const std::size_t workers = std::min<std::size_t>(resolve_threads(threads), std::max<std::size_t>(images.size(), 1));
  std::vector<CorpusAccumulator> partial(workers);
  parallel_chunks(images.size(), static_cast<unsigned>(workers), [&](std::size_t begin, std::size_t end, std::size_t w) {
    for (std::size_t i = begin; i < end; ++i) partial[w].add(images[i]);
  });
  for (std::size_t w = 1; w < partial.size(); ++w) partial[0].merge(partial[w]);
  return partial[0].stats();
}

double BinRanking::top_share(std::size_t k) const {
  if (k == 0 || cumulative.empty()) return 0.0;
  return cumulative[std::min(k, cumulative.size()) - 1];
}

double BinRanking::bottom_share(std::size_t k) const {
  k = std::min(k, bins.size());
  std::vector<double> tail;
  for (std::size_t i = bins.size() - k; i < bins.size(); ++i) tail.push_back(bins[i].share);
  return detail::compensated_sum(tail);
}

BinRanking rank_bins(const CorpusStats& stats) {
  const auto shares = stats.per_bin_share();
  BinRanking out;
  for (std::uint32_t b = 0; b < kRgbBins; ++b) out.bins.push_back({b, shares[b]});
  std::sort(out.bins.begin(), out.bins.end(), [](const RankedBin& x, const RankedBin& y) {
    return x.share != y.share ? x.share > y.share : x.bin < y.bin;
  });
  // Running compensated sum keeps the curve monotone and its end at 1 to rounding.
  double sum = 0.0;
  double carry = 0.0;
  for (const auto& rb : out.bins) {
    const double t = sum + rb.share;
    carry += std::abs(sum) >= rb.share ? (sum - t) + rb.share : (rb.share - t) + sum;
    sum = t;
    const double value = sum + carry;
    out.cumulative.push_back(out.cumulative.empty() ? value : std::max(value, out.cumulative.back()));
  }
  return out;
}

bool RareBinSet::contains(std::uint32_t bin) const { return std::find(bins.begin(), bins.end(), bin) != bins.end(); }

RareBinSet rarest_bins(const BinRanking& ranking, std::size_t k) {
  k = std::min(k, ranking.bins.size());
  RareBinSet out;
  std::vector<double> shares;
  for (std::size_t i = 0; i < k; ++i) {
    const auto& rb = ranking.bins[ranking.bins.size() - 1 - i];
    out.bins.push_back(rb.bin);
    shares.push_back(rb.share);
  }
  out.share_covered = detail::compensated_sum(shares);
  return out;
}

double rare_fraction(const Image& image, const RareBinSet& rare) {
  if (image.empty()) throw Error("empty input");
  std::array<bool, kRgbBins> is_rare{};
  for (auto b : rare.bins) {
    if (b >= kRgbBins) throw Error("rare bin index out of range");
    is_rare[b] = true;
  }
  std::uint64_t hits = 0;
  for (std::size_t i = 0; i < image.pixel_count(); ++i) {
    if (is_rare[rgb_bin_of(image.rgb[3 * i], image.rgb[3 * i + 1], image.rgb[3 * i + 2])]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(image.pixel_count());
}

CurationSelection select_rare_images(const std::vector<std::pair<std::string, Image>>& candidates,
                                     const RareBinSet& rare, double tau, unsigned threads) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw Error("tau must lie in [0,1]");
  std::vector<double> fractions(candidates.size());
  parallel_for(candidates.size(), threads,
               [&](std::size_t i) { fractions[i] = rare_fraction(candidates[i].second, rare); });
  CurationSelection out;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (fractions[i] >= tau) out.selected.push_back({candidates[i].first, fractions[i]});
  }
  return out;
}

CurationSelection select_rare_images(const std::vector<std::string>& paths, const RareBinSet& rare, double tau,
                                     unsigned threads, std::vector<SkippedImage>* skipped) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw Error("tau must lie in [0,1]");
  std::vector<std::optional<double>> fractions(paths.size());
  std::vector<std::string> errors(paths.size());
  parallel_for(paths.size(), threads, [&](std::size_t i) {
    try {
      fractions[i] = rare_fraction(read_image(paths[i]), rare);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  CurationSelection out;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (!fractions[i]) {
      if (skipped != nullptr) skipped->push_back({paths[i], errors[i]});
    } else if (*fractions[i] >= tau) {
      out.selected.push_back({paths[i], *fractions[i]});
    }
  }
  return out;
}

}  // namespace palette_forge
