#include "palette_forge/conditioning.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "palette_forge/error.hpp"
#include "palette_forge/version.hpp"
#include "random.hpp"

namespace palette_forge {

namespace {

constexpr char kPcndMagic[4] = {'P', 'C', 'N', 'D'};
constexpr std::size_t kPcndHeader = 4 + 2 + 1 + 1 + 4 + 4;

std::size_t column(AugmentationType t) {
  switch (t) {
    case AugmentationType::Histogram: return 0;
    case AugmentationType::Palette: return 1;
    case AugmentationType::Unconditioned: return 2;
  }
  return 2;
}

void put_f32(std::vector<std::uint8_t>& out, float f) {
  const auto bits = std::bit_cast<std::uint32_t>(f);
  for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<std::uint8_t>(bits >> shift));
}

float get_f32(std::span<const std::uint8_t> in, std::size_t at) {
  std::uint32_t bits = 0;
  for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(in[at + i]) << (8 * i);
  return std::bit_cast<float>(bits);
}

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

std::string_view to_string(AugmentationType t) {
  switch (t) {
    case AugmentationType::Unconditioned: return "none";
    case AugmentationType::Histogram: return "histogram";
    case AugmentationType::Palette: return "palette";
  }
  return "none";
}

AugmentationType parse_augmentation(std::string_view text) {
  if (text == "histogram") return AugmentationType::Histogram;
  if (text == "palette") return AugmentationType::Palette;
  if (text == "none" || text == "unconditioned") return AugmentationType::Unconditioned;
  throw Error("unknown augmentation type '" + std::string(text) + "'");
}

void ConditionRecord::validate() const {
  if (!std::isfinite(distance) || distance < 0.0) throw Error("condition distance must be non-negative");
  if (!std::isfinite(entropy) || entropy < 0.0) throw Error("condition entropy must be non-negative");
  switch (aug_type) {
    case AugmentationType::Unconditioned:
      if (!histogram.is_zero() || distance != 0.0 || entropy != 0.0) {
        throw Error("unconditioned record must carry an all-zero payload");
      }
      break;
    case AugmentationType::Histogram:
      if (distance != 0.0) throw Error("histogram record must have zero distance");
      break;
    case AugmentationType::Palette:
      break;
    default:
      throw Error("invalid augmentation type");
  }
}

void DropoutTable::validate() const {
  double sum = 0.0;
  for (double p : color_probs) {
    if (!is_probability(p)) throw Error("color dropout probabilities must lie in [0,1]");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw Error("color dropout probabilities must sum to 1");
  for (double p : text_keep_probs) {
    if (!is_probability(p)) throw Error("text keep probabilities must lie in [0,1]");
  }
  if (!is_probability(entropy_drop_prob)) throw Error("entropy drop probability must lie in [0,1]");
}

AugmentationSampler::AugmentationSampler(DropoutTable table, std::uint64_t seed) : table_(table), rng_(seed) {
  table_.validate();
}

AugmentationDraw AugmentationSampler::next() {
  const double u = detail::uniform01(rng_);
  AugmentationType type = AugmentationType::Unconditioned;
  if (u < table_.color_probs[0]) {
    type = AugmentationType::Histogram;
  } else if (u < table_.color_probs[0] + table_.color_probs[1]) {
    type = AugmentationType::Palette;
  }
  return next_for(type);
}

AugmentationDraw AugmentationSampler::next_for(AugmentationType aug_type) {
  AugmentationDraw draw;
  draw.aug_type = aug_type;
  draw.text_present = detail::uniform01(rng_) < table_.text_keep_probs[column(aug_type)];
  draw.entropy_dropped = detail::uniform01(rng_) < table_.entropy_drop_prob;
  return draw;
}

AugmentationDraw sample_augmentation(const DropoutTable& table, std::uint64_t seed) {
  return AugmentationSampler(table, seed).next();
}

ConditionRecord build_condition(const HsvHistogram& image_hist, const std::optional<Palette>& palette,
                                AugmentationType aug, const GroundDistance& ground, const ConditionParams& params,
                                bool text_present, bool drop_entropy) {
  ConditionRecord rec{HsvHistogram(image_hist.dims()), aug, 0.0, 0.0, text_present};
  if (aug == AugmentationType::Unconditioned) return rec;

  const double image_entropy = entropy(image_hist);
  rec.entropy = drop_entropy ? 0.0 : image_entropy;
  if (aug == AugmentationType::Histogram) {
    rec.histogram = image_hist;
    return rec;
  }
  if (!palette) throw Error("palette augmentation requires a palette");
  rec.histogram = palette_to_histogram(*palette, image_hist.dims());
  rec.distance = quadratic_chi(rec.histogram, image_hist, SimilarityMatrix(ground), params.qc_exponent);
  return rec;
}

std::vector<double> cfg_combine(std::span<const double> eps_pos, std::span<const double> eps_neg, double w) {
  if (eps_pos.size() != eps_neg.size()) throw Error("guidance vectors differ in length");
  std::vector<double> out(eps_pos.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = eps_neg[i] + w * (eps_pos[i] - eps_neg[i]);
  return out;
}

double relative_entropy(double entropy_pos, double entropy_neg) { return entropy_pos - entropy_neg; }

std::vector<std::uint8_t> serialize_condition(const ConditionRecord& record) {
  record.validate();
  std::vector<std::uint8_t> out(std::begin(kPcndMagic), std::end(kPcndMagic));
  out.push_back(static_cast<std::uint8_t>(kConditionFormatVersion & 0xFF));
  out.push_back(static_cast<std::uint8_t>(kConditionFormatVersion >> 8));
  out.push_back(static_cast<std::uint8_t>(record.aug_type));
  out.push_back(record.text_present ? 1 : 0);
  put_f32(out, static_cast<float>(record.distance));
  put_f32(out, static_cast<float>(record.entropy));
  const auto block = encode_phst(record.histogram);
  out.insert(out.end(), block.begin(), block.end());
  return out;
}

ConditionRecord deserialize_condition(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kPcndHeader || std::memcmp(bytes.data(), kPcndMagic, 4) != 0) {
    throw FormatError("bad PCND magic");
  }
  const auto version = static_cast<std::uint16_t>(bytes[4] | (bytes[5] << 8));
  if (version != kConditionFormatVersion) throw FormatError("unsupported PCND version");
  if (bytes[6] > 2) throw FormatError("invalid augmentation type in PCND record");
  if (bytes[7] > 1) throw FormatError("invalid text flag in PCND record");

  std::size_t consumed = 0;
  ConditionRecord rec{decode_phst(bytes.subspan(kPcndHeader), &consumed),
                      static_cast<AugmentationType>(bytes[6]), get_f32(bytes, 8), get_f32(bytes, 12),
                      bytes[7] == 1};
  if (kPcndHeader + consumed != bytes.size()) throw FormatError("trailing bytes after PCND record");
  try {
    rec.validate();
  } catch (const Error& e) {
    throw FormatError(std::string("invalid PCND record: ") + e.what());
  }
  return rec;
}

void write_condition(const std::string& path, const ConditionRecord& record) {
  const auto bytes = serialize_condition(record);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing '" + path + "'");
}

ConditionRecord read_condition(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_condition(bytes);
}

}  // namespace palette_forge
