#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "palette_forge/conditioning.hpp"
#include "palette_forge/curation.hpp"
#include "palette_forge/eval.hpp"
#include "palette_forge/histogram.hpp"
#include "palette_forge/palette.hpp"

namespace palette_forge {

using Json = nlohmann::ordered_json;

/// {"colors": ["#RRGGBB", ...], "weights": [...]}; weights are omitted when absent.
Json palette_to_json(const Palette& palette);
Palette palette_from_json(const Json& j);

/// {"dims": [h, s, v], "bins": {"<flat>": mass, ...}} with nonzero bins only.
Json histogram_to_json(const HsvHistogram& h);
HsvHistogram histogram_from_json(const Json& j);

/// {"image_count": N, "bins": [512 shares]}.
Json stats_to_json(const CorpusStats& stats);
/// Shares are read back as bin masses, so per_bin_share() of the result reproduces them.
CorpusStats stats_from_json(const Json& j);

Json report_to_json(const EvalReport& report);
Json ablation_to_json(const AblationReport& report);
Json distance_params_to_json(const DistanceParams& params);

/// Parses a whole file. Throws IoError when unreadable and FormatError on invalid JSON.
Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

Palette read_palette(const std::string& path);
void write_palette(const std::string& path, const Palette& palette);

/// Every tunable of the toolkit, all defaulted.
struct Config {
  DistanceParams distance;
  double qc_exponent = 0.5;
  HistogramDims dims = kDefaultDims;
  DropoutTable dropout;
  double tau = 0.05;
  std::size_t rare_k = 100;
  std::uint64_t seed = 0;
  int palette_colors = kMaxExtractedColors;  // training palettes
  int eval_colors = 5;                       // evaluation palettes
  Downsample downsample = Downsample::Box;
  unsigned threads = 0;

  /// Throws Error when any field is out of range.
  void validate() const;
};

/// Missing keys keep their defaults; unknown keys are rejected.
///
///   {"distance": {"threshold": 20, "gamma": 1, "m": 0.5},
///    "dims": [34, 12, 10],
///    "dropout": {"color": [0.45, 0.45, 0.1], "text_keep": [0.8, 0.8, 0.05], "entropy_drop": 0.1},
///    "curation": {"tau": 0.05, "rare_k": 100},
///    "palette": {"colors": 8, "eval_colors": 5},
///    "eval": {"downsample": "box"},
///    "seed": 0, "threads": 0}
Config config_from_json(const Json& j);
Json config_to_json(const Config& config);
Config load_config(const std::string& path);

}  // namespace palette_forge
