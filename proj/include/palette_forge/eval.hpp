#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "palette_forge/colorspace.hpp"
#include "palette_forge/image.hpp"
#include "palette_forge/palette.hpp"
#include "palette_forge/transport.hpp"

namespace palette_forge {

/// Version of the pinned color-word list; bump whenever the list changes.
inline constexpr int kColorWordListVersion = 1;

const std::array<std::string_view, 30>& color_words();

/// Case-insensitive whole-word search; words are maximal runs of ASCII letters and digits.
bool mentions_color(std::string_view caption);

struct CaptionCheck {
  std::string caption;
  bool passes = false;  // true when no color word occurs
};

std::vector<CaptionCheck> filter_color_captions(const std::vector<std::string>& captions);

struct EvalCase {
  std::string image;
  Palette palette;
  std::string caption;
  std::uint64_t seed = 0;
};

struct EvalParams {
  DistanceParams distance;
  unsigned threads = 0;
};

struct CaseResult {
  std::string image;
  std::optional<double> emd;  // empty when the case failed
  std::string error;
};

/// Mean and population standard deviation of a sample, independent of its order.
struct Summary {
  std::size_t count = 0;
  double mean = 0.0;
  double std = 0.0;
};

/// Values are sorted before compensated summation, so any permutation gives the same bits.
/// An empty sample yields count 0 and zero statistics.
Summary summarize(std::vector<double> values);

struct EvalReport {
  std::vector<CaseResult> cases;  // input order
  Summary summary;                // over successful cases only
  std::size_t failed = 0;
  DistanceParams params;
  static constexpr std::string_view kStdKind = "population";
};

/// EMD between each generated image's histogram and its case's palette histogram.
/// `load` is called once per case, possibly concurrently; a throwing load marks that case failed.
EvalReport evaluate(const std::vector<EvalCase>& cases, const std::function<Image(std::size_t)>& load,
                    const EvalParams& params = {});

/// In-memory variant; an empty optional counts as a missing image.
EvalReport evaluate(const std::vector<EvalCase>& cases, const std::vector<std::optional<Image>>& generated,
                    const EvalParams& params = {});

double palette_emd(const Image& image, const Palette& palette, const GroundDistance& ground);

enum class Downsample { Box, Nearest };

inline constexpr int kPaletteGrid = 8;
inline constexpr int kPaletteUpsampled = 512;

struct Palette2DOptions {
  DistanceParams distance;
  Downsample downsample = Downsample::Box;
};

struct Palette2D {
  std::vector<ColorRgb> cells;            // 8x8 downsampled image, row-major
  std::vector<ColorRgb> grid;             // 8x8 recolored grid, row-major
  std::vector<std::uint32_t> assignment;  // palette index per cell
  TransportPlan plan;                     // cell -> palette color, masses sum to 1
  Image upsampled;                        // 512x512 nearest-neighbor expansion of grid
};

/// 8x8 reduction of an image. Every cell covers at least one source pixel.
std::vector<ColorRgb> downsample_grid(const Image& image, Downsample method = Downsample::Box);

/// Balanced OT between the 64 cells (1/64 each) and the palette colors (1/k each); each
/// cell takes the color receiving its largest flow, ties going to the lower palette index.
Palette2D make_palette_2d(const Image& image, const Palette& target, const Palette2DOptions& options = {});

struct AblationRow {
  std::string block;
  Summary summary;
};

struct AblationReport {
  std::vector<AblationRow> rows;  // ascending by mean, ties by block name
  std::vector<std::string> warnings;

  /// Block with the lowest mean. Throws Error on an empty report.
  const AblationRow& best() const;
};

/// Orders per-block summaries; blocks with no samples are dropped with a warning.
AblationReport rank_blocks(std::vector<AblationRow> rows);

struct AblationSample {
  Image image;
  Palette palette;
};

AblationReport ablation_report(const std::map<std::string, std::vector<AblationSample>>& runs,
                               const EvalParams& params = {});

/// Aggregates precomputed per-block EMD values.
AblationReport ablation_report(const std::map<std::string, std::vector<double>>& emds);

}  // namespace palette_forge
