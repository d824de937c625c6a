#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "palette_forge/histogram.hpp"
#include "palette_forge/palette.hpp"
#include "palette_forge/transport.hpp"

namespace palette_forge {

enum class AugmentationType : std::uint8_t { Unconditioned = 0, Histogram = 1, Palette = 2 };

std::string_view to_string(AugmentationType t);
/// Accepts "none"/"unconditioned", "histogram", "palette".
AugmentationType parse_augmentation(std::string_view text);

/// Pre-projection adapter payload: the raw histogram plus scalar features.
struct ConditionRecord {
  HsvHistogram histogram;
  AugmentationType aug_type = AugmentationType::Unconditioned;
  double distance = 0.0;  // Quadratic-Chi palette-to-image distance; zero unless aug_type is Palette
  double entropy = 0.0;   // bits, of the full image histogram
  bool text_present = false;

  /// Throws Error if the type-specific invariants do not hold.
  void validate() const;

  friend bool operator==(const ConditionRecord&, const ConditionRecord&) = default;
};

/// Per-type probabilities, indexed (histogram, palette, none).
struct DropoutTable {
  std::array<double, 3> color_probs{0.45, 0.45, 0.10};
  /// Probability of keeping the text embedding given the color type.
  std::array<double, 3> text_keep_probs{0.80, 0.80, 0.05};
  double entropy_drop_prob = 0.10;

  void validate() const;
};

struct AugmentationDraw {
  AugmentationType aug_type = AugmentationType::Unconditioned;
  bool text_present = false;
  bool entropy_dropped = false;

  friend bool operator==(const AugmentationDraw&, const AugmentationDraw&) = default;
};

/// Seeded stream of augmentation draws.
class AugmentationSampler {
 public:
  AugmentationSampler(DropoutTable table, std::uint64_t seed);

  AugmentationDraw next();
  /// Draw for an already chosen color type (text and entropy dropout only).
  AugmentationDraw next_for(AugmentationType aug_type);

 private:
  DropoutTable table_;
  std::mt19937_64 rng_;
};

/// First draw of the stream seeded with `seed`.
AugmentationDraw sample_augmentation(const DropoutTable& table, std::uint64_t seed);

struct ConditionParams {
  DistanceParams distance;
  double qc_exponent = 0.5;
};

/// Assembles a record. Palette augmentation requires `palette`; `drop_entropy` zeroes the
/// entropy scalar the way training-time dropout does.
ConditionRecord build_condition(const HsvHistogram& image_hist, const std::optional<Palette>& palette,
                                AugmentationType aug, const GroundDistance& ground,
                                const ConditionParams& params = {}, bool text_present = true,
                                bool drop_entropy = false);

/// w * eps_pos + (1 - w) * eps_neg, elementwise.
std::vector<double> cfg_combine(std::span<const double> eps_pos, std::span<const double> eps_neg, double w);

/// E+ - E-; negative values lower entropy relative to the null branch.
double relative_entropy(double entropy_pos, double entropy_neg);

// PCND: "PCND", u16 version, u8 aug type, u8 text flag, f32 distance, f32 entropy, PHST block.
std::vector<std::uint8_t> serialize_condition(const ConditionRecord& record);
ConditionRecord deserialize_condition(std::span<const std::uint8_t> bytes);

void write_condition(const std::string& path, const ConditionRecord& record);
ConditionRecord read_condition(const std::string& path);

}  // namespace palette_forge
