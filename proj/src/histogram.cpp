#include "palette_forge/histogram.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "palette_forge/error.hpp"
#include "palette_forge/version.hpp"
#include "summation.hpp"

namespace palette_forge {

namespace {

constexpr char kPhstMagic[4] = {'P', 'H', 'S', 'T'};

std::uint32_t clamp_floor(double x, std::uint32_t bins) {
  if (!(x > 0.0)) return 0;
  const double f = std::floor(x);
  return f >= bins ? bins - 1 : static_cast<std::uint32_t>(f);
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_f32(std::vector<std::uint8_t>& out, float f) {
  const auto bits = std::bit_cast<std::uint32_t>(f);
  for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<std::uint8_t>(bits >> shift));
}

std::uint16_t get_u16(std::span<const std::uint8_t> in, std::size_t at) {
  return static_cast<std::uint16_t>(in[at] | (in[at + 1] << 8));
}

float get_f32(std::span<const std::uint8_t> in, std::size_t at) {
  std::uint32_t bits = 0;
  for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(in[at + i]) << (8 * i);
  return std::bit_cast<float>(bits);
}

}  // namespace

void HistogramDims::validate() const {
  if (h == 0 || s == 0 || v == 0) throw Error("histogram dimensions must be positive");
}

BinIndex BinIndex::from_flat(std::uint32_t flat, const HistogramDims& dims) {
  if (flat >= dims.size()) throw Error("bin index out of range");
  return {flat / (std::uint32_t{dims.s} * dims.v), (flat / dims.v) % dims.s, flat % dims.v, flat};
}

BinIndex BinIndex::from_components(std::uint32_t h_bin, std::uint32_t s_bin, std::uint32_t v_bin,
                                   const HistogramDims& dims) {
  if (h_bin >= dims.h || s_bin >= dims.s || v_bin >= dims.v) throw Error("bin index out of range");
  return {h_bin, s_bin, v_bin, (h_bin * dims.s + s_bin) * dims.v + v_bin};
}

BinIndex bin_of(const ColorHsv& c, const HistogramDims& dims) {
  const std::uint32_t h_bin = clamp_floor(c.h / 360.0 * dims.h, dims.h);
  const std::uint32_t s_bin = clamp_floor(c.s * dims.s, dims.s);
  const std::uint32_t v_bin = clamp_floor(c.v * dims.v, dims.v);
  return {h_bin, s_bin, v_bin, (h_bin * dims.s + s_bin) * dims.v + v_bin};
}

std::uint32_t flat_bin_of_u8(std::uint8_t r, std::uint8_t g, std::uint8_t b, const HistogramDims& dims) {
  return bin_of(rgb_to_hsv(rgb_from_u8(r, g, b)), dims).flat;
}

ColorHsv bin_center_hsv(const BinIndex& b, const HistogramDims& dims) {
  return {(b.h_bin + 0.5) * 360.0 / dims.h, (b.s_bin + 0.5) / dims.s, (b.v_bin + 0.5) / dims.v};
}

ColorLab bin_center_lab(const BinIndex& b, const HistogramDims& dims) {
  return rgb_to_lab(hsv_to_rgb(bin_center_hsv(b, dims)));
}

HsvHistogram::HsvHistogram(HistogramDims dims) : dims_(dims), mass_(dims.size(), 0.0) {
  dims_.validate();
}

HsvHistogram::HsvHistogram(HistogramDims dims, std::vector<double> mass) : dims_(dims), mass_(std::move(mass)) {
  dims_.validate();
  if (mass_.size() != dims_.size()) throw Error("histogram mass vector does not match dimensions");
  for (double m : mass_) {
    if (!std::isfinite(m) || m < 0.0) throw Error("histogram masses must be finite and non-negative");
  }
  normalized_ = std::abs(total() - 1.0) <= kNormalizationTolerance;
}

HsvHistogram HsvHistogram::from_sparse(const SparseHistogram& sparse) {
  sparse.dims.validate();
  std::vector<double> mass(sparse.dims.size(), 0.0);
  for (const auto& [flat, m] : sparse.bins) {
    if (flat >= mass.size()) throw Error("sparse histogram bin out of range");
    mass[flat] += m;
  }
  return HsvHistogram(sparse.dims, std::move(mass));
}

double HsvHistogram::total() const { return detail::compensated_sum(mass_); }

bool HsvHistogram::is_zero() const {
  return std::all_of(mass_.begin(), mass_.end(), [](double m) { return m == 0.0; });
}

SparseHistogram HsvHistogram::to_sparse() const {
  SparseHistogram out{dims_, {}};
  for (std::uint32_t i = 0; i < mass_.size(); ++i) {
    if (mass_[i] != 0.0) out.bins.emplace_back(i, mass_[i]);
  }
  return out;
}

std::vector<std::uint32_t> HsvHistogram::support() const {
  std::vector<std::uint32_t> out;
  for (std::uint32_t i = 0; i < mass_.size(); ++i) {
    if (mass_[i] != 0.0) out.push_back(i);
  }
  return out;
}

BinCounter::BinCounter(HistogramDims dims) : dims_(dims), counts_(dims.size(), 0) { dims_.validate(); }

void BinCounter::add(const ColorRgb& c) {
  ++counts_[bin_of(rgb_to_hsv(c), dims_).flat];
  ++total_;
}

void BinCounter::add_u8(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  ++counts_[flat_bin_of_u8(r, g, b, dims_)];
  ++total_;
}

void BinCounter::merge(const BinCounter& other) {
  if (other.dims_ != dims_) throw Error("cannot merge histograms with different dimensions");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  total_ += other.total_;
}

HsvHistogram BinCounter::to_histogram() const {
  if (total_ == 0) throw Error("empty input");
  std::vector<double> mass(counts_.size());
  const auto n = static_cast<double>(total_);
  for (std::size_t i = 0; i < counts_.size(); ++i) mass[i] = static_cast<double>(counts_[i]) / n;
  return HsvHistogram(dims_, std::move(mass));
}

HsvHistogram histogram_of_image(std::span<const ColorRgb> pixels, const HistogramDims& dims) {
  BinCounter counter(dims);
  for (const auto& px : pixels) counter.add(px);
  return counter.to_histogram();
}

double entropy(const HsvHistogram& h) {
  if (!h.is_normalized()) throw Error("histogram not normalized");
  std::vector<double> terms;
  terms.reserve(h.size());
  for (double p : h.mass()) {
    if (p > 0.0) terms.push_back(-p * std::log2(p));
  }
  return std::max(0.0, detail::compensated_sum(terms));
}

HsvHistogram normalize(const HsvHistogram& h) {
  if (h.is_normalized()) return h;
  const double total = h.total();
  if (!(total > 0.0)) throw Error("cannot normalize a zero-mass histogram");
  std::vector<double> mass(h.mass().begin(), h.mass().end());
  for (double& m : mass) m /= total;
  return HsvHistogram(h.dims(), std::move(mass));
}

std::size_t phst_size(const HistogramDims& dims) { return 4 + 2 + 3 * 2 + 4 * dims.size(); }

std::vector<std::uint8_t> encode_phst(const HsvHistogram& h) {
  if (h.dims() != kDefaultDims) throw Error("PHST format requires 34x12x10 dimensions");
  std::vector<std::uint8_t> out(std::begin(kPhstMagic), std::end(kPhstMagic));
  out.reserve(phst_size(h.dims()));
  put_u16(out, kHistogramFormatVersion);
  put_u16(out, h.dims().h);
  put_u16(out, h.dims().s);
  put_u16(out, h.dims().v);
  for (double m : h.mass()) put_f32(out, static_cast<float>(m));
  return out;
}

HsvHistogram decode_phst(std::span<const std::uint8_t> bytes, std::size_t* consumed) {
  constexpr std::size_t kHeader = 12;
  if (bytes.size() < kHeader || std::memcmp(bytes.data(), kPhstMagic, 4) != 0) {
    throw FormatError("bad PHST magic");
  }
  if (get_u16(bytes, 4) != kHistogramFormatVersion) throw FormatError("unsupported PHST version");
  const HistogramDims dims{get_u16(bytes, 6), get_u16(bytes, 8), get_u16(bytes, 10)};
  if (dims != kDefaultDims) throw FormatError("PHST dimensions must be 34x12x10");
  const std::size_t size = phst_size(dims);
  if (bytes.size() < size) throw FormatError("truncated PHST block");

  std::vector<double> mass(dims.size());
  for (std::size_t i = 0; i < mass.size(); ++i) {
    const float m = get_f32(bytes, kHeader + 4 * i);
    if (!std::isfinite(m) || m < 0.0f) throw FormatError("PHST block holds a negative or non-finite mass");
    mass[i] = m;
  }
  if (consumed != nullptr) *consumed = size;
  return HsvHistogram(dims, std::move(mass));
}

void write_phst(const std::string& path, const HsvHistogram& h) {
  const auto bytes = encode_phst(h);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing '" + path + "'");
}

HsvHistogram read_phst(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t consumed = 0;
  auto h = decode_phst(bytes, &consumed);
  if (consumed != bytes.size()) throw FormatError("trailing bytes after PHST block in '" + path + "'");
  return h;
}

}  // namespace palette_forge
