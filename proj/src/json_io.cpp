#include "palette_forge/json_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "palette_forge/error.hpp"

namespace palette_forge {

namespace {

// Runs `fn`, turning JSON type and access errors into FormatError with some context.
template <typename Fn>
auto guarded(const char* what, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Json::exception& e) {
    throw FormatError(std::string("invalid ") + what + ": " + e.what());
  }
}

void reject_unknown(const Json& obj, std::initializer_list<const char*> known, const std::string& where) {
  if (!obj.is_object()) throw FormatError(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    bool found = false;
    for (const char* k : known) found = found || key == k;
    if (!found) throw FormatError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read_if(const Json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

}  // namespace

Json palette_to_json(const Palette& palette) {
  Json j;
  j["colors"] = Json::array();
  for (const auto& c : palette.colors) j["colors"].push_back(to_hex(c));
  if (palette.weights) j["weights"] = *palette.weights;
  return j;
}

Palette palette_from_json(const Json& j) {
  return guarded("palette", [&] {
    reject_unknown(j, {"colors", "weights"}, "palette");
    Palette p;
    for (const auto& c : j.at("colors")) p.colors.push_back(parse_hex(c.get<std::string>()));
    if (j.contains("weights") && !j.at("weights").is_null()) p.weights = j.at("weights").get<std::vector<double>>();
    try {
      p.validate();
    } catch (const Error& e) {
      throw FormatError(std::string("invalid palette: ") + e.what());
    }
    return p;
  });
}

Json histogram_to_json(const HsvHistogram& h) {
  Json j;
  j["dims"] = {h.dims().h, h.dims().s, h.dims().v};
  j["bins"] = Json::object();
  for (const auto& [flat, mass] : h.to_sparse().bins) j["bins"][std::to_string(flat)] = mass;
  return j;
}

HsvHistogram histogram_from_json(const Json& j) {
  return guarded("histogram", [&] {
    reject_unknown(j, {"dims", "bins"}, "histogram");
    const auto dims = j.at("dims").get<std::vector<std::uint16_t>>();
    if (dims.size() != 3) throw FormatError("histogram dims must have three entries");
    SparseHistogram sparse{{dims[0], dims[1], dims[2]}, {}};
    for (const auto& [key, value] : j.at("bins").items()) {
      std::size_t used = 0;
      unsigned long flat = 0;
      try {
        flat = std::stoul(key, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != key.size() || key.empty()) throw FormatError("histogram bin key '" + key + "' is not an index");
      sparse.bins.emplace_back(static_cast<std::uint32_t>(flat), value.get<double>());
    }
    std::sort(sparse.bins.begin(), sparse.bins.end());
    try {
      return HsvHistogram::from_sparse(sparse);
    } catch (const FormatError&) {
      throw;
    } catch (const Error& e) {
      throw FormatError(std::string("invalid histogram: ") + e.what());
    }
  });
}

Json stats_to_json(const CorpusStats& stats) {
  Json j;
  j["image_count"] = stats.image_count;
  const auto shares = stats.per_bin_share();
  j["bins"] = std::vector<double>(shares.begin(), shares.end());
  return j;
}

CorpusStats stats_from_json(const Json& j) {
  return guarded("stats", [&] {
    CorpusStats s;
    s.image_count = j.at("image_count").get<std::uint64_t>();
    const auto bins = j.at("bins").get<std::vector<double>>();
    if (bins.size() != kRgbBins) throw FormatError("stats must list 512 bins");
    for (std::size_t b = 0; b < kRgbBins; ++b) {
      if (!(bins[b] >= 0.0) || !std::isfinite(bins[b])) throw FormatError("stats bins must be non-negative");
      s.bin_counts[b] = bins[b];
    }
    if (s.image_count == 0) throw FormatError("stats image_count must be positive");
    return s;
  });
}

Json distance_params_to_json(const DistanceParams& params) {
  return Json{{"threshold", params.threshold}, {"gamma", params.sharpen_exponent}};
}

Json report_to_json(const EvalReport& report) {
  Json j;
  j["metric"] = "emd";
  j["case_count"] = report.cases.size();
  j["evaluated"] = report.summary.count;
  j["failed"] = report.failed;
  j["mean"] = report.summary.mean;
  j["std"] = report.summary.std;
  j["std_kind"] = std::string(EvalReport::kStdKind);
  j["params"] = distance_params_to_json(report.params);
  j["cases"] = Json::array();
  for (const auto& c : report.cases) {
    Json cj{{"image", c.image}};
    if (c.emd) {
      cj["emd"] = *c.emd;
    } else {
      cj["emd"] = nullptr;
      cj["error"] = c.error;
    }
    j["cases"].push_back(std::move(cj));
  }
  return j;
}

Json ablation_to_json(const AblationReport& report) {
  Json j;
  j["std_kind"] = std::string(EvalReport::kStdKind);
  j["rows"] = Json::array();
  for (const auto& r : report.rows) {
    j["rows"].push_back({{"block", r.block}, {"mean", r.summary.mean}, {"std", r.summary.std}, {"count", r.summary.count}});
  }
  if (!report.rows.empty()) j["best"] = report.best().block;
  j["warnings"] = report.warnings;
  return j;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw FormatError("'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw IoError("failed writing '" + path + "'");
}

Palette read_palette(const std::string& path) { return palette_from_json(read_json_file(path)); }

void write_palette(const std::string& path, const Palette& palette) {
  write_text_file(path, palette_to_json(palette).dump(2) + "\n");
}

void Config::validate() const {
  distance.validate();
  if (!(qc_exponent >= 0.0 && qc_exponent < 1.0)) throw Error("m must lie in [0,1)");
  if (dims != kDefaultDims) throw Error("histogram dims are fixed at 34x12x10");
  dropout.validate();
  if (!(tau >= 0.0 && tau <= 1.0)) throw Error("tau must lie in [0,1]");
  if (rare_k == 0 || rare_k > kRgbBins) throw Error("rare_k must lie in [1,512]");
  if (palette_colors < 1 || palette_colors > kMaxExtractedColors) throw Error("palette colors must lie in [1,8]");
  if (eval_colors < 1) throw Error("eval colors must be positive");
}

Config config_from_json(const Json& j) {
  return guarded("config", [&] {
    Config c;
    reject_unknown(j, {"distance", "dims", "dropout", "curation", "palette", "eval", "seed", "threads"}, "config");
    if (j.contains("distance")) {
      const auto& d = j.at("distance");
      reject_unknown(d, {"threshold", "gamma", "m"}, "config.distance");
      read_if(d, "threshold", c.distance.threshold);
      read_if(d, "gamma", c.distance.sharpen_exponent);
      read_if(d, "m", c.qc_exponent);
    }
    if (j.contains("dims")) {
      const auto dims = j.at("dims").get<std::vector<std::uint16_t>>();
      if (dims.size() != 3) throw FormatError("config.dims must have three entries");
      c.dims = {dims[0], dims[1], dims[2]};
    }
    if (j.contains("dropout")) {
      const auto& d = j.at("dropout");
      reject_unknown(d, {"color", "text_keep", "entropy_drop"}, "config.dropout");
      read_if(d, "color", c.dropout.color_probs);
      read_if(d, "text_keep", c.dropout.text_keep_probs);
      read_if(d, "entropy_drop", c.dropout.entropy_drop_prob);
    }
    if (j.contains("curation")) {
      const auto& d = j.at("curation");
      reject_unknown(d, {"tau", "rare_k"}, "config.curation");
      read_if(d, "tau", c.tau);
      read_if(d, "rare_k", c.rare_k);
    }
    if (j.contains("palette")) {
      const auto& d = j.at("palette");
      reject_unknown(d, {"colors", "eval_colors"}, "config.palette");
      read_if(d, "colors", c.palette_colors);
      read_if(d, "eval_colors", c.eval_colors);
    }
    if (j.contains("eval")) {
      const auto& d = j.at("eval");
      reject_unknown(d, {"downsample"}, "config.eval");
      if (d.contains("downsample")) {
        const auto m = d.at("downsample").get<std::string>();
        if (m == "box") {
          c.downsample = Downsample::Box;
        } else if (m == "nearest") {
          c.downsample = Downsample::Nearest;
        } else {
          throw FormatError("config.eval.downsample must be 'box' or 'nearest'");
        }
      }
    }
    read_if(j, "seed", c.seed);
    read_if(j, "threads", c.threads);
    try {
      c.validate();
    } catch (const FormatError&) {
      throw;
    } catch (const Error& e) {
      throw FormatError(std::string("invalid config: ") + e.what());
    }
    return c;
  });
}

Json config_to_json(const Config& c) {
  Json j;
  j["distance"] = {{"threshold", c.distance.threshold}, {"gamma", c.distance.sharpen_exponent}, {"m", c.qc_exponent}};
  j["dims"] = {c.dims.h, c.dims.s, c.dims.v};
  j["dropout"] = {{"color", c.dropout.color_probs},
                  {"text_keep", c.dropout.text_keep_probs},
                  {"entropy_drop", c.dropout.entropy_drop_prob}};
  j["curation"] = {{"tau", c.tau}, {"rare_k", c.rare_k}};
  j["palette"] = {{"colors", c.palette_colors}, {"eval_colors", c.eval_colors}};
  j["eval"] = {{"downsample", c.downsample == Downsample::Box ? "box" : "nearest"}};
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  return j;
}

Config load_config(const std::string& path) { return config_from_json(read_json_file(path)); }

}  // namespace palette_forge
