#include "palette_forge/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include "palette_forge/conditioning.hpp"
#include "palette_forge/curation.hpp"
#include "palette_forge/error.hpp"
#include "palette_forge/eval.hpp"
#include "palette_forge/image.hpp"
#include "palette_forge/json_io.hpp"
#include "palette_forge/parallel.hpp"
#include "palette_forge/transport.hpp"
#include "palette_forge/version.hpp"

namespace palette_forge::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kConfigEnv = "PALETTE_FORGE_CONFIG";

std::string version_text() {
  std::ostringstream os;
  os << "palette-forge " << kVersion << " (PHST v" << kHistogramFormatVersion << ", PCND v"
     << kConditionFormatVersion << ", color words v" << kColorWordListVersion << ")";
  return os.str();
}

// ---------------------------------------------------------------------------------------------
// Output

std::string scalar_text(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "-";
  return v.dump();
}

void flatten(const Json& j, const std::string& prefix, std::vector<std::pair<std::string, Json>>& out) {
  for (const auto& [key, value] : j.items()) {
    const std::string name = prefix.empty() ? key : prefix + "." + key;
    if (value.is_object()) {
      flatten(value, name, out);
    } else {
      out.emplace_back(name, value);
    }
  }
}

void render_table(const Json& rows, std::ostream& os) {
  std::vector<std::string> columns;
  for (const auto& row : rows) {
    for (const auto& [key, value] : row.items()) {
      if (std::find(columns.begin(), columns.end(), key) == columns.end()) columns.push_back(key);
    }
  }
  std::vector<std::size_t> width;
  for (const auto& c : columns) width.push_back(c.size());
  std::vector<std::vector<std::string>> cells;
  for (const auto& row : rows) {
    auto& line = cells.emplace_back();
    for (std::size_t c = 0; c < columns.size(); ++c) {
      line.push_back(row.contains(columns[c]) ? scalar_text(row.at(columns[c])) : "");
      width[c] = std::max(width[c], line.back().size());
    }
  }
  const auto print_row = [&](const std::vector<std::string>& values) {
    os << " ";
    for (std::size_t c = 0; c < values.size(); ++c) os << " " << std::left << std::setw(static_cast<int>(width[c])) << values[c];
    os << "\n";
  };
  print_row(columns);
  for (const auto& line : cells) print_row(line);
}

// Scalars as "key: value", arrays of objects as aligned tables.
void render_pretty(const Json& j, std::ostream& os) {
  if (!j.is_object()) {
    os << j.dump(2) << "\n";
    return;
  }
  std::vector<std::pair<std::string, Json>> fields;
  flatten(j, "", fields);
  std::size_t pad = 0;
  for (const auto& [k, v] : fields) pad = std::max(pad, k.size());
  for (const auto& [k, v] : fields) {
    if (v.is_array() && !v.empty() && v.front().is_object()) {
      os << k << ":\n";
      render_table(v, os);
    } else if (v.is_array()) {
      os << std::left << std::setw(static_cast<int>(pad)) << k << "  ";
      for (std::size_t i = 0; i < v.size(); ++i) os << (i ? " " : "") << scalar_text(v[i]);
      os << "\n";
    } else {
      os << std::left << std::setw(static_cast<int>(pad)) << k << "  " << scalar_text(v) << "\n";
    }
  }
}

struct Context {
  Config config;
  bool pretty = false;
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;

  void print(const Json& j) const {
    if (pretty) {
      render_pretty(j, *out);
    } else {
      *out << j.dump() << "\n";
    }
  }

  // JSON document to `path` when given, otherwise to stdout.
  void emit(const Json& j, const std::string& path) const {
    if (path.empty()) {
      print(j);
    } else {
      write_text_file(path, j.dump(2) + "\n");
    }
  }

  void warn(const std::string& message) const { *err << "warning: " << message << "\n"; }
};

// ---------------------------------------------------------------------------------------------
// Inputs

std::vector<std::uint8_t> read_prefix(const std::string& path, std::size_t n) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::vector<std::uint8_t> bytes(n);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(n));
  bytes.resize(static_cast<std::size_t>(in.gcount()));
  return bytes;
}

bool starts_with(const std::vector<std::uint8_t>& bytes, std::initializer_list<std::uint8_t> magic) {
  return bytes.size() >= magic.size() && std::equal(magic.begin(), magic.end(), bytes.begin());
}

bool is_image_bytes(const std::vector<std::uint8_t>& b) {
  return starts_with(b, {0x89, 'P', 'N', 'G'}) || starts_with(b, {0xFF, 0xD8, 0xFF});
}

Palette palette_from_json_or_file(const Json& value, const fs::path& base) {
  if (value.is_string()) {
    fs::path p = value.get<std::string>();
    if (p.is_relative()) p = base / p;
    return read_palette(p.string());
  }
  return palette_from_json(value);
}

// A normalized histogram from a PHST file, an image, a palette JSON or a histogram JSON.
HsvHistogram load_distribution(const std::string& path, const Context& ctx) {
  const auto head = read_prefix(path, 8);
  if (starts_with(head, {'P', 'H', 'S', 'T'})) return normalize(read_phst(path));
  if (is_image_bytes(head)) return histogram_of_image(read_image(path), kDefaultDims, ctx.config.threads);
  const Json j = read_json_file(path);
  if (j.is_object() && j.contains("colors")) return palette_to_histogram(palette_from_json(j));
  return normalize(histogram_from_json(j));
}

bool has_image_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Image files of a directory (sorted, non-recursive) or the lines of a manifest file.
// Relative manifest entries are resolved against the manifest's directory.
std::vector<std::string> list_inputs(const std::string& source) {
  std::vector<std::string> paths;
  std::error_code ec;
  if (fs::is_directory(source, ec)) {
    for (const auto& entry : fs::directory_iterator(source)) {
      if (entry.is_regular_file() && has_image_extension(entry.path())) paths.push_back(entry.path().string());
    }
    std::sort(paths.begin(), paths.end());
    return paths;
  }
  std::ifstream in(source);
  if (!in) throw IoError("cannot open '" + source + "'");
  const fs::path base = fs::path(source).parent_path();
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    fs::path p = line;
    if (p.is_relative()) p = base / p;
    paths.push_back(p.string());
  }
  return paths;
}

std::vector<Json> read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::vector<Json> rows;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    line = trim(line);
    if (line.empty()) continue;
    try {
      rows.push_back(Json::parse(line));
    } catch (const Json::exception& e) {
      throw FormatError(path + ":" + std::to_string(number) + ": " + e.what());
    }
    if (!rows.back().is_object()) throw FormatError(path + ":" + std::to_string(number) + ": expected an object");
  }
  return rows;
}

Json skipped_to_json(const std::vector<SkippedImage>& skipped) {
  Json j = Json::array();
  for (const auto& s : skipped) j.push_back({{"image", s.id}, {"reason", s.reason}});
  return j;
}

Json params_json(const Config& c) {
  return {{"threshold", c.distance.threshold}, {"gamma", c.distance.sharpen_exponent}, {"m", c.qc_exponent}};
}

// ---------------------------------------------------------------------------------------------
// Shared flag sets

struct DistanceFlags {
  std::optional<double> threshold;
  std::optional<double> gamma;
  std::optional<double> m;

  void add(CLI::App* app, bool with_m) {
    app->add_option("--threshold", threshold, "Clip level T in delta-E00 units")->check(CLI::PositiveNumber);
    app->add_option("--gamma", gamma, "Sharpening exponent applied after clipping")->check(CLI::PositiveNumber);
    if (with_m) app->add_option("--m", m, "Quadratic-Chi normalization exponent")->check(CLI::Range(0.0, 1.0));
  }

  void apply(Config& c) const {
    if (threshold) c.distance.threshold = *threshold;
    if (gamma) c.distance.sharpen_exponent = *gamma;
    if (m) c.qc_exponent = *m;
  }
};

// ---------------------------------------------------------------------------------------------
// Subcommands

struct HistArgs {
  std::string image;
  std::string output;
};

void cmd_hist(const Context& ctx, const HistArgs& a) {
  const auto h = histogram_of_image(read_image(a.image), kDefaultDims, ctx.config.threads);
  if (a.output.empty()) {
    ctx.print(histogram_to_json(h));
    return;
  }
  if (fs::path(a.output).extension() == ".json") {
    write_text_file(a.output, histogram_to_json(h).dump(2) + "\n");
  } else {
    write_phst(a.output, h);
  }
  ctx.print({{"output", a.output}, {"nonzero_bins", h.support().size()}, {"entropy_bits", entropy(h)}});
}

struct ExtractArgs {
  std::string image;
  std::string method = "median-cut";
  std::optional<int> k;
  std::optional<std::uint64_t> seed;
  std::string output;
};

void cmd_extract(const Context& ctx, const ExtractArgs& a) {
  const auto pixels = read_image(a.image).pixels();
  Palette p;
  if (a.method == "median-cut") {
    p = extract_median_cut(pixels, a.k.value_or(ctx.config.palette_colors));
  } else {
    KMeansOptions o;
    o.k = a.k.value_or(ctx.config.eval_colors);
    o.seed = a.seed.value_or(ctx.config.seed);
    p = extract_kmeans(pixels, o);
  }
  ctx.emit(palette_to_json(p), a.output);
}

struct DistArgs {
  std::string metric;
  std::string a;
  std::string b;
  bool oracle = false;
  std::string output;
};

void cmd_dist(const Context& ctx, const DistArgs& a) {
  const auto p = load_distribution(a.a, ctx);
  const auto q = load_distribution(a.b, ctx);
  const GroundDistance ground(ctx.config.distance);
  Json j;
  if (a.metric == "emd") {
    j["distance"] = a.oracle ? emd_oracle(p, q, ground) : emd(p, q, ground).cost;
    j["metric"] = "emd";
    j["solver"] = a.oracle ? "lp-oracle" : "min-cost-flow";
  } else {
    if (a.oracle) throw Error("--oracle applies to emd only");
    j["distance"] = quadratic_chi(p, q, SimilarityMatrix(ground), ctx.config.qc_exponent);
    j["metric"] = "qc";
  }
  j["params"] = params_json(ctx.config);
  ctx.emit(j, a.output);
}

struct EntropyArgs {
  std::string input;
  std::string output;
};

void cmd_entropy(const Context& ctx, const EntropyArgs& a) {
  ctx.emit({{"entropy_bits", entropy(load_distribution(a.input, ctx))}}, a.output);
}

struct EncodeArgs {
  std::string image;
  std::string palette;
  std::string manifest;
  std::string aug = "sample";
  std::optional<std::uint64_t> seed;
  bool no_dropout = false;
  std::string output;
};

struct EncodeJob {
  std::string image;
  std::string palette;
  AugmentationDraw draw;
  std::string output;
};

Json encode_one(const Context& ctx, const EncodeJob& job, const GroundDistance& ground) {
  const Image img = read_image(job.image);
  const auto hist = histogram_of_image(img, kDefaultDims, 1);
  std::optional<Palette> palette;
  if (!job.palette.empty()) {
    palette = read_palette(job.palette);
  } else if (job.draw.aug_type == AugmentationType::Palette) {
    palette = extract_median_cut(img.pixels(), ctx.config.palette_colors);
  }
  const ConditionParams params{ctx.config.distance, ctx.config.qc_exponent};
  const auto rec = build_condition(hist, palette, job.draw.aug_type, ground, params, job.draw.text_present,
                                   job.draw.entropy_dropped);
  write_condition(job.output, rec);
  return {{"image", job.image},
          {"output", job.output},
          {"aug", std::string(to_string(rec.aug_type))},
          {"text_present", rec.text_present},
          {"entropy_dropped", job.draw.entropy_dropped},
          {"distance", rec.distance},
          {"entropy", rec.entropy}};
}

void cmd_encode(const Context& ctx, const EncodeArgs& a) {
  if (a.image.empty() == a.manifest.empty()) throw CLI::ValidationError("encode", "give exactly one of --image or --manifest");
  if (a.output.empty()) throw CLI::RequiredError("-o");

  std::vector<std::pair<std::string, std::string>> inputs;  // image, palette
  if (!a.image.empty()) {
    inputs.emplace_back(a.image, a.palette);
  } else {
    std::ifstream in(a.manifest);
    if (!in) throw IoError("cannot open '" + a.manifest + "'");
    const fs::path base = fs::path(a.manifest).parent_path();
    std::string line;
    while (std::getline(in, line)) {
      line = trim(line);
      if (line.empty() || line.front() == '#') continue;
      const auto tab = line.find('\t');
      const auto cut = tab != std::string::npos ? tab : line.find_first_of(" ");
      std::string image = trim(line.substr(0, cut));
      std::string pal = cut == std::string::npos ? "" : trim(line.substr(cut + 1));
      const auto resolve = [&](const std::string& s) {
        if (s.empty()) return s;
        fs::path p = s;
        return (p.is_relative() ? base / p : p).string();
      };
      inputs.emplace_back(resolve(image), pal.empty() ? a.palette : resolve(pal));
    }
    fs::create_directories(a.output);
  }

  // Draws are taken in input order so the records do not depend on the thread count.
  AugmentationSampler sampler(ctx.config.dropout, a.seed.value_or(ctx.config.seed));
  std::vector<EncodeJob> jobs;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    EncodeJob job{inputs[i].first, inputs[i].second, {}, a.output};
    job.draw = a.aug == "sample" ? sampler.next() : sampler.next_for(parse_augmentation(a.aug));
    if (a.no_dropout) {
      job.draw.text_present = true;
      job.draw.entropy_dropped = false;
    }
    if (!a.manifest.empty()) {
      char name[32];
      std::snprintf(name, sizeof name, "%06zu_", i);
      job.output = (fs::path(a.output) / (name + fs::path(job.image).stem().string() + ".pcnd")).string();
    }
    jobs.push_back(std::move(job));
  }

  const GroundDistance ground(ctx.config.distance);
  std::vector<Json> rows(jobs.size());
  std::vector<std::string> errors(jobs.size());
  parallel_for(jobs.size(), ctx.config.threads, [&](std::size_t i) {
    try {
      rows[i] = encode_one(ctx, jobs[i], ground);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  if (a.manifest.empty()) {
    if (!errors[0].empty()) throw Error(errors[0]);
    ctx.print(rows[0]);
    return;
  }
  Json records = Json::array();
  Json failed = Json::array();
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (errors[i].empty()) {
      records.push_back(rows[i]);
    } else {
      failed.push_back({{"image", jobs[i].image}, {"reason", errors[i]}});
      ctx.warn("skipped '" + jobs[i].image + "': " + errors[i]);
    }
  }
  ctx.print({{"records", records}, {"failed", failed}});
}

struct ScanArgs {
  std::string source;
  std::string output;
  std::size_t report_k = 100;
};

void cmd_scan(const Context& ctx, const ScanArgs& a) {
  const auto scan = scan_corpus(list_inputs(a.source), ctx.config.threads);
  for (const auto& s : scan.skipped) ctx.warn("skipped '" + s.id + "': " + s.reason);
  const auto ranking = rank_bins(scan.stats);
  Json stats = stats_to_json(scan.stats);
  if (!a.output.empty()) {
    write_text_file(a.output, stats.dump(2) + "\n");
    stats = Json{{"output", a.output}, {"image_count", scan.stats.image_count}};
  }
  stats["skipped"] = skipped_to_json(scan.skipped);
  stats["top_k"] = a.report_k;
  stats["top_k_share"] = ranking.top_share(a.report_k);
  stats["bottom_k_share"] = ranking.bottom_share(a.report_k);
  ctx.print(stats);
}

struct SelectArgs {
  std::string stats;
  std::string source;
  std::optional<std::size_t> rare_k;
  std::optional<double> tau;
  std::string output;
};

void cmd_select(const Context& ctx, const SelectArgs& a) {
  const auto stats = stats_from_json(read_json_file(a.stats));
  const auto rare = rarest_bins(rank_bins(stats), a.rare_k.value_or(ctx.config.rare_k));
  const double tau = a.tau.value_or(ctx.config.tau);
  std::vector<SkippedImage> skipped;
  const auto selection = select_rare_images(list_inputs(a.source), rare, tau, ctx.config.threads, &skipped);
  for (const auto& s : skipped) ctx.warn("skipped '" + s.id + "': " + s.reason);

  Json selected = Json::array();
  std::string listing;
  for (const auto& s : selection.selected) {
    selected.push_back({{"image", s.id}, {"rare_fraction", s.rare_fraction}});
    listing += s.id + "\n";
  }
  if (!a.output.empty()) write_text_file(a.output, listing);
  ctx.print({{"rare_k", rare.bins.size()},
             {"rare_share", rare.share_covered},
             {"tau", tau},
             {"rare_bins", rare.bins},
             {"selected", selected},
             {"skipped", skipped_to_json(skipped)}});
}

struct EvalArgs {
  std::string manifest;
  std::string images;
  bool filter_captions = false;
  std::string output;
};

void cmd_eval(const Context& ctx, const EvalArgs& a) {
  const fs::path base = fs::path(a.manifest).parent_path();
  const fs::path image_dir = a.images.empty() ? base : fs::path(a.images);
  std::vector<EvalCase> cases;
  Json excluded = Json::array();
  for (const auto& row : read_jsonl(a.manifest)) {
    try {
      EvalCase c;
      fs::path img = row.at("image").get<std::string>();
      c.image = (img.is_relative() ? image_dir / img : img).string();
      c.palette = palette_from_json_or_file(row.at("palette"), base);
      c.caption = row.value("caption", std::string());
      c.seed = row.value("seed", std::uint64_t{0});
      if (a.filter_captions && mentions_color(c.caption)) {
        excluded.push_back({{"image", c.image}, {"caption", c.caption}});
        continue;
      }
      cases.push_back(std::move(c));
    } catch (const Json::exception& e) {
      throw FormatError(a.manifest + ": invalid case: " + e.what());
    }
  }
  EvalParams params{ctx.config.distance, ctx.config.threads};
  const auto report = evaluate(cases, [&](std::size_t i) { return read_image(cases[i].image); }, params);
  for (const auto& c : report.cases) {
    if (!c.emd) ctx.warn("case '" + c.image + "' failed: " + c.error);
  }
  Json j = report_to_json(report);
  if (a.filter_captions) j["excluded_color_captions"] = excluded;
  j["color_words_version"] = kColorWordListVersion;
  ctx.emit(j, a.output);
}

struct AlignArgs {
  std::string image;
  std::string palette;
  std::optional<std::string> downsample;
  std::string output;
};

void cmd_align(const Context& ctx, const AlignArgs& a) {
  Palette2DOptions options;
  options.distance = ctx.config.distance;
  options.downsample = ctx.config.downsample;
  if (a.downsample) options.downsample = *a.downsample == "nearest" ? Downsample::Nearest : Downsample::Box;
  const auto result = make_palette_2d(read_image(a.image), read_palette(a.palette), options);
  if (!a.output.empty()) write_png(a.output, result.upsampled);
  Json grid = Json::array();
  for (const auto& c : result.grid) grid.push_back(to_hex(c));
  Json j{{"cost", result.plan.total_cost}, {"assignment", result.assignment}, {"grid", grid}};
  if (!a.output.empty()) j["output"] = a.output;
  j["params"] = params_json(ctx.config);
  ctx.print(j);
}

struct AblateArgs {
  std::string manifest;
  std::string images;
  std::string output;
};

void cmd_ablate(const Context& ctx, const AblateArgs& a) {
  const fs::path base = fs::path(a.manifest).parent_path();
  const fs::path image_dir = a.images.empty() ? base : fs::path(a.images);
  struct Row {
    std::string block;
    std::optional<double> emd;
    std::string image;
    std::optional<Palette> palette;
  };
  std::vector<Row> rows;
  for (const auto& j : read_jsonl(a.manifest)) {
    try {
      Row r{j.at("block").get<std::string>(), std::nullopt, "", std::nullopt};
      if (j.contains("emd")) {
        r.emd = j.at("emd").get<double>();
      } else if (j.contains("image")) {
        fs::path img = j.at("image").get<std::string>();
        r.image = (img.is_relative() ? image_dir / img : img).string();
        r.palette = palette_from_json_or_file(j.at("palette"), base);
      }
      rows.push_back(std::move(r));
    } catch (const Json::exception& e) {
      throw FormatError(a.manifest + ": invalid run: " + e.what());
    }
  }

  const GroundDistance ground(ctx.config.distance);
  std::vector<std::string> errors(rows.size());
  parallel_for(rows.size(), ctx.config.threads, [&](std::size_t i) {
    if (rows[i].emd || rows[i].image.empty()) return;
    try {
      rows[i].emd = palette_emd(read_image(rows[i].image), *rows[i].palette, ground);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  std::map<std::string, std::vector<double>> emds;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto& values = emds[rows[i].block];
    if (rows[i].emd) {
      values.push_back(*rows[i].emd);
    } else if (!errors[i].empty()) {
      ctx.warn("run '" + rows[i].image + "' of block '" + rows[i].block + "' failed: " + errors[i]);
    }
  }
  const auto report = ablation_report(emds);
  for (const auto& w : report.warnings) ctx.warn(w);
  Json j = ablation_to_json(report);
  j["params"] = params_json(ctx.config);
  ctx.emit(j, a.output);
}

struct OracleArgs {
  std::size_t pairs = 200;
  std::size_t max_bins = 12;
  std::optional<std::uint64_t> seed;
  double tolerance = 1e-6;
};

HsvHistogram random_sparse(std::mt19937_64& rng, std::size_t max_bins) {
  std::uniform_int_distribution<std::size_t> count(1, max_bins);
  std::uniform_int_distribution<std::uint32_t> bin(0, static_cast<std::uint32_t>(kDefaultDims.size() - 1));
  std::uniform_real_distribution<double> weight(0.05, 1.0);
  std::vector<double> mass(kDefaultDims.size(), 0.0);
  const std::size_t n = count(rng);
  for (std::size_t i = 0; i < n; ++i) mass[bin(rng)] += weight(rng);
  return normalize(HsvHistogram(kDefaultDims, std::move(mass)));
}

int cmd_oracle(const Context& ctx, const OracleArgs& a) {
  if (a.max_bins < 1 || 2 * a.max_bins > kOracleMaxBins) throw CLI::ValidationError("--max-bins", "must lie in [1,32]");
  const GroundDistance ground(ctx.config.distance);
  std::mt19937_64 rng(a.seed.value_or(ctx.config.seed));
  std::vector<std::pair<HsvHistogram, HsvHistogram>> instances;
  for (std::size_t i = 0; i < a.pairs; ++i) {
    auto p = random_sparse(rng, a.max_bins);
    auto q = random_sparse(rng, a.max_bins);
    instances.emplace_back(std::move(p), std::move(q));
  }
  const auto start = std::chrono::steady_clock::now();
  std::vector<double> diff(instances.size());
  parallel_for(instances.size(), ctx.config.threads, [&](std::size_t i) {
    const auto& [p, q] = instances[i];
    diff[i] = std::abs(emd(p, q, ground).cost - emd_oracle(p, q, ground));
  });
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const double worst = diff.empty() ? 0.0 : *std::max_element(diff.begin(), diff.end());
  const bool passed = worst <= a.tolerance;
  ctx.print({{"pairs", a.pairs},
             {"max_bins", a.max_bins},
             {"max_abs_diff", worst},
             {"tolerance", a.tolerance},
             {"passed", passed},
             {"seconds", seconds}});
  return passed ? kExitOk : kExitCheckFailed;
}

Config initial_config(const std::string& flag_path) {
  if (!flag_path.empty()) return load_config(flag_path);
  if (const char* env = std::getenv(kConfigEnv); env != nullptr && *env != '\0') return load_config(env);
  return Config{};
}

}  // namespace

int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Color conditioning and evaluation toolkit", "palette-forge"};
  app.set_version_flag("--version", version_text());
  app.require_subcommand(1);
  app.fallthrough();
  app.failure_message(CLI::FailureMessage::help);

  std::string config_path;
  std::optional<unsigned> threads;
  bool pretty = false;
  app.add_option("--config", config_path, "JSON config file (default: $" + std::string(kConfigEnv) + ")");
  app.add_option("--threads", threads, "Worker threads (0 = all cores)");
  app.add_flag("--pretty", pretty, "Human-readable tables instead of JSON");

  DistanceFlags dist_flags;
  int status = kExitOk;
  std::function<void(const Context&)> action;

  HistArgs hist;
  auto* c_hist = app.add_subcommand("hist", "HSV histogram of an image");
  c_hist->add_option("image", hist.image)->required();
  c_hist->add_option("-o,--output", hist.output, "Output .phst (or .json)");
  c_hist->callback([&] { action = [&](const Context& ctx) { cmd_hist(ctx, hist); }; });

  ExtractArgs extract;
  auto* c_extract = app.add_subcommand("extract", "Extract a palette from an image");
  c_extract->add_option("image", extract.image)->required();
  c_extract->add_option("--method", extract.method)->check(CLI::IsMember({"median-cut", "kmeans"}));
  c_extract->add_option("-k", extract.k, "Number of colors");
  c_extract->add_option("--seed", extract.seed);
  c_extract->add_option("-o,--output", extract.output);
  c_extract->callback([&] { action = [&](const Context& ctx) { cmd_extract(ctx, extract); }; });

  DistArgs dist;
  auto* c_dist = app.add_subcommand("dist", "EMD or Quadratic-Chi distance");
  c_dist->add_option("metric", dist.metric)->required()->check(CLI::IsMember({"emd", "qc"}));
  c_dist->add_option("a", dist.a, ".phst, histogram/palette JSON, or image")->required();
  c_dist->add_option("b", dist.b)->required();
  c_dist->add_flag("--oracle", dist.oracle, "Solve EMD with the dense LP oracle");
  c_dist->add_option("-o,--output", dist.output);
  dist_flags.add(c_dist, true);
  c_dist->callback([&] { action = [&](const Context& ctx) { cmd_dist(ctx, dist); }; });

  EntropyArgs ent;
  auto* c_entropy = app.add_subcommand("entropy", "Shannon entropy in bits");
  c_entropy->add_option("input", ent.input)->required();
  c_entropy->add_option("-o,--output", ent.output);
  c_entropy->callback([&] { action = [&](const Context& ctx) { cmd_entropy(ctx, ent); }; });

  EncodeArgs enc;
  auto* c_encode = app.add_subcommand("encode", "Build PCND condition records");
  c_encode->add_option("--image", enc.image);
  c_encode->add_option("--palette", enc.palette, "Palette JSON (default for manifest lines without one)");
  c_encode->add_option("--manifest", enc.manifest, "Lines of: image [palette]");
  c_encode->add_option("--aug", enc.aug)->check(CLI::IsMember({"histogram", "palette", "none", "sample"}));
  c_encode->add_option("--seed", enc.seed);
  c_encode->add_flag("--no-dropout", enc.no_dropout, "Keep text and entropy regardless of the dropout table");
  c_encode->add_option("-o,--output", enc.output, "Output file, or directory with --manifest");
  dist_flags.add(c_encode, true);
  c_encode->callback([&] { action = [&](const Context& ctx) { cmd_encode(ctx, enc); }; });

  ScanArgs scan;
  auto* c_scan = app.add_subcommand("scan-corpus", "8x8x8 RGB corpus statistics");
  c_scan->add_option("source", scan.source, "Directory or manifest")->required();
  c_scan->add_option("-o,--output", scan.output, "stats.json");
  c_scan->add_option("--report-k", scan.report_k)->check(CLI::Range(1, 512));
  c_scan->callback([&] { action = [&](const Context& ctx) { cmd_scan(ctx, scan); }; });

  SelectArgs sel;
  auto* c_select = app.add_subcommand("select-rare", "Images containing rare corpus colors");
  c_select->add_option("--stats", sel.stats)->required();
  c_select->add_option("--rare-k", sel.rare_k)->check(CLI::Range(1, 512));
  c_select->add_option("--tau", sel.tau)->check(CLI::Range(0.0, 1.0));
  c_select->add_option("source", sel.source, "Directory or manifest")->required();
  c_select->add_option("-o,--output", sel.output, "Selected paths, one per line");
  c_select->callback([&] { action = [&](const Context& ctx) { cmd_select(ctx, sel); }; });

  EvalArgs ev;
  auto* c_eval = app.add_subcommand("eval", "Palette-adherence EMD evaluation");
  c_eval->add_option("--manifest", ev.manifest, "cases.jsonl")->required();
  c_eval->add_option("--images", ev.images, "Directory holding the generated images");
  c_eval->add_flag("--filter-captions", ev.filter_captions, "Drop cases whose caption names a color");
  c_eval->add_option("-o,--output", ev.output);
  dist_flags.add(c_eval, false);
  c_eval->callback([&] { action = [&](const Context& ctx) { cmd_eval(ctx, ev); }; });

  AlignArgs align;
  auto* c_align = app.add_subcommand("align-2d", "8x8 palette layout aligned by optimal transport");
  c_align->add_option("image", align.image)->required();
  c_align->add_option("palette", align.palette)->required();
  c_align->add_option("--downsample", align.downsample)->check(CLI::IsMember({"box", "nearest"}));
  c_align->add_option("-o,--output", align.output, "512x512 PNG");
  dist_flags.add(c_align, false);
  c_align->callback([&] { action = [&](const Context& ctx) { cmd_align(ctx, align); }; });

  AblateArgs abl;
  auto* c_ablate = app.add_subcommand("ablate-report", "Per-block EMD table");
  c_ablate->add_option("--manifest", abl.manifest, "runs.jsonl")->required();
  c_ablate->add_option("--images", abl.images);
  c_ablate->add_option("-o,--output", abl.output);
  dist_flags.add(c_ablate, false);
  c_ablate->callback([&] { action = [&](const Context& ctx) { cmd_ablate(ctx, abl); }; });

  OracleArgs orc;
  auto* c_oracle = app.add_subcommand("oracle", "Cross-check min-cost-flow EMD against the LP oracle");
  c_oracle->add_option("--pairs", orc.pairs);
  c_oracle->add_option("--max-bins", orc.max_bins);
  c_oracle->add_option("--seed", orc.seed);
  c_oracle->add_option("--tolerance", orc.tolerance)->check(CLI::NonNegativeNumber);
  dist_flags.add(c_oracle, false);
  c_oracle->callback([&] { action = [&](const Context& ctx) { status = cmd_oracle(ctx, orc); }; });

  std::vector<std::string> args(argv.begin() + (argv.empty() ? 0 : 1), argv.end());
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    Context ctx;
    ctx.config = initial_config(config_path);
    dist_flags.apply(ctx.config);
    if (threads) ctx.config.threads = *threads;
    ctx.config.validate();
    ctx.pretty = pretty;
    ctx.out = &out;
    ctx.err = &err;
    action(ctx);
    return status;
  } catch (const CLI::Error& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  return run(std::vector<std::string>(argv, argv + argc), out, err);
}

}  // namespace palette_forge::cli
