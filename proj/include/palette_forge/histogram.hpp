#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "palette_forge/colorspace.hpp"

namespace palette_forge {

/// Bin counts along H, S and V. The file formats fix 34x12x10; other shapes exist for tests.
struct HistogramDims {
  std::uint16_t h = 34;
  std::uint16_t s = 12;
  std::uint16_t v = 10;

  constexpr std::size_t size() const { return std::size_t{h} * s * v; }
  void validate() const;

  friend bool operator==(const HistogramDims&, const HistogramDims&) = default;
};

inline constexpr HistogramDims kDefaultDims{};
inline constexpr double kNormalizationTolerance = 1e-9;

struct BinIndex {
  std::uint32_t h_bin = 0;
  std::uint32_t s_bin = 0;
  std::uint32_t v_bin = 0;
  std::uint32_t flat = 0;

  static BinIndex from_flat(std::uint32_t flat, const HistogramDims& dims = kDefaultDims);
  static BinIndex from_components(std::uint32_t h_bin, std::uint32_t s_bin, std::uint32_t v_bin,
                                  const HistogramDims& dims = kDefaultDims);

  friend bool operator==(const BinIndex&, const BinIndex&) = default;
};

/// floor(x * bins) per channel, with the upper boundary clamped into the last bin.
BinIndex bin_of(const ColorHsv& c, const HistogramDims& dims = kDefaultDims);

/// Flat bin of an 8-bit sRGB pixel; same result as bin_of(rgb_to_hsv(rgb_from_u8(...))).
std::uint32_t flat_bin_of_u8(std::uint8_t r, std::uint8_t g, std::uint8_t b,
                             const HistogramDims& dims = kDefaultDims);

/// Center of the bin in HSV and its CIELAB conversion.
ColorHsv bin_center_hsv(const BinIndex& b, const HistogramDims& dims = kDefaultDims);
ColorLab bin_center_lab(const BinIndex& b, const HistogramDims& dims = kDefaultDims);

/// Nonzero bins only, sorted by flat index.
struct SparseHistogram {
  HistogramDims dims;
  std::vector<std::pair<std::uint32_t, double>> bins;
};

/// Immutable dense histogram over the HSV grid.
///
/// A histogram is "normalized" when every mass is non-negative and the total is within
/// kNormalizationTolerance of one; the flag is derived from the masses at construction.
class HsvHistogram {
 public:
  /// All-zero histogram (the unconditioned payload).
  explicit HsvHistogram(HistogramDims dims = kDefaultDims);

  /// Throws Error on negative or non-finite masses or a size mismatch.
  HsvHistogram(HistogramDims dims, std::vector<double> mass);

  static HsvHistogram from_sparse(const SparseHistogram& sparse);

  const HistogramDims& dims() const { return dims_; }
  std::size_t size() const { return mass_.size(); }
  std::span<const double> mass() const { return mass_; }
  double operator[](std::size_t flat) const { return mass_[flat]; }

  bool is_normalized() const { return normalized_; }
  double total() const;
  bool is_zero() const;

  SparseHistogram to_sparse() const;
  /// Flat indices of nonzero bins, ascending.
  std::vector<std::uint32_t> support() const;

  friend bool operator==(const HsvHistogram& a, const HsvHistogram& b) {
    return a.dims_ == b.dims_ && a.mass_ == b.mass_;
  }

 private:
  HistogramDims dims_;
  std::vector<double> mass_;
  bool normalized_ = false;
};

/// Integer pixel counts per bin; partial results from pixel chunks merge by addition.
class BinCounter {
 public:
  explicit BinCounter(HistogramDims dims = kDefaultDims);

  void add(const ColorRgb& c);
  void add_u8(std::uint8_t r, std::uint8_t g, std::uint8_t b);
  void merge(const BinCounter& other);

  std::uint64_t pixel_count() const { return total_; }
  const std::vector<std::uint64_t>& counts() const { return counts_; }

  /// Each bin gets count / N. Throws Error("empty input") when no pixel was added.
  HsvHistogram to_histogram() const;

 private:
  HistogramDims dims_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

/// Each pixel adds 1/N mass to its bin. Throws Error("empty input") for no pixels.
HsvHistogram histogram_of_image(std::span<const ColorRgb> pixels, const HistogramDims& dims = kDefaultDims);

/// Shannon entropy in bits. Throws Error("histogram not normalized") otherwise.
double entropy(const HsvHistogram& h);

/// Divides by the total mass; normalized inputs are returned unchanged.
HsvHistogram normalize(const HsvHistogram& h);

// PHST binary block: "PHST", u16 version, three u16 dims, then float32 masses, little endian.
std::vector<std::uint8_t> encode_phst(const HsvHistogram& h);
/// Decodes a PHST block starting at `bytes`; `consumed` receives the block size.
HsvHistogram decode_phst(std::span<const std::uint8_t> bytes, std::size_t* consumed = nullptr);
std::size_t phst_size(const HistogramDims& dims);

void write_phst(const std::string& path, const HsvHistogram& h);
HsvHistogram read_phst(const std::string& path);

}  // namespace palette_forge
