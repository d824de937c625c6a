#include "palette_forge/eval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "palette_forge/error.hpp"
#include "palette_forge/parallel.hpp"
#include "summation.hpp"

namespace palette_forge {

namespace {

constexpr std::array<std::string_view, 30> kColorWords = {
    "red",    "orange", "yellow",    "green",   "blue",    "purple", "violet", "pink",
    "brown",  "black",  "white",     "gray",    "grey",    "cyan",   "magenta", "teal",
    "gold",   "golden", "silver",    "beige",   "tan",     "maroon", "navy",   "turquoise",
    "crimson", "scarlet", "indigo", "lavender", "olive", "colorful"};

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

std::uint8_t to_u8(double channel) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(channel, 0.0, 1.0) * 255.0));
}

// Pixel span [begin, end) of cell `c` along an axis of length n; never empty.
std::pair<int, int> cell_span(int c, int n) {
  const int begin = std::min(c * n / kPaletteGrid, n - 1);
  const int end = std::max((c + 1) * n / kPaletteGrid, begin + 1);
  return {begin, end};
}

}  // namespace

const std::array<std::string_view, 30>& color_words() { return kColorWords; }

bool mentions_color(std::string_view caption) {
  std::size_t i = 0;
  std::string word;
  while (i < caption.size()) {
    while (i < caption.size() && !is_word_char(caption[i])) ++i;
    word.clear();
    while (i < caption.size() && is_word_char(caption[i])) {
      word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(caption[i]))));
      ++i;
    }
    if (!word.empty() && std::find(kColorWords.begin(), kColorWords.end(), word) != kColorWords.end()) return true;
  }
  return false;
}

std::vector<CaptionCheck> filter_color_captions(const std::vector<std::string>& captions) {
  std::vector<CaptionCheck> out;
  out.reserve(captions.size());
  for (const auto& c : captions) out.push_back({c, !mentions_color(c)});
  return out;
}

Summary summarize(std::vector<double> values) {
  Summary s;
  s.count = values.size();
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  s.mean = detail::compensated_sum(values) / n;
  std::vector<double> sq;
  sq.reserve(values.size());
  for (double v : values) sq.push_back((v - s.mean) * (v - s.mean));
  s.std = std::sqrt(detail::compensated_sum(sq) / n);
  return s;
}

double palette_emd(const Image& image, const Palette& palette, const GroundDistance& ground) {
  const auto image_hist = histogram_of_image(image, ground.dims());
  return emd(image_hist, palette_to_histogram(palette, ground.dims()), ground).cost;
}

EvalReport evaluate(const std::vector<EvalCase>& cases, const std::function<Image(std::size_t)>& load,
                    const EvalParams& params) {
  params.distance.validate();
  const GroundDistance ground(params.distance);
  EvalReport report;
  report.params = params.distance;
  report.cases.resize(cases.size());
  parallel_for(cases.size(), params.threads, [&](std::size_t i) {
    auto& result = report.cases[i];
    result.image = cases[i].image;
    try {
      result.emd = palette_emd(load(i), cases[i].palette, ground);
    } catch (const std::exception& e) {
      result.error = e.what();
    }
  });
  std::vector<double> values;
  for (const auto& c : report.cases) {
    if (c.emd) {
      values.push_back(*c.emd);
    } else {
      ++report.failed;
    }
  }
  report.summary = summarize(std::move(values));
  return report;
}

EvalReport evaluate(const std::vector<EvalCase>& cases, const std::vector<std::optional<Image>>& generated,
                    const EvalParams& params) {
  if (generated.size() != cases.size()) throw Error("one generated image is required per case");
  return evaluate(
      cases,
      [&](std::size_t i) -> Image {
        if (!generated[i]) throw IoError("missing generated image for '" + cases[i].image + "'");
        return *generated[i];
      },
      params);
}

std::vector<ColorRgb> downsample_grid(const Image& image, Downsample method) {
  if (image.empty()) throw Error("empty input");
  std::vector<ColorRgb> cells;
  cells.reserve(kPaletteGrid * kPaletteGrid);
  for (int cy = 0; cy < kPaletteGrid; ++cy) {
    const auto [y0, y1] = cell_span(cy, image.height);
    for (int cx = 0; cx < kPaletteGrid; ++cx) {
      const auto [x0, x1] = cell_span(cx, image.width);
      if (method == Downsample::Nearest) {
        cells.push_back(image.pixel((x0 + x1 - 1) / 2, (y0 + y1 - 1) / 2));
        continue;
      }
      std::uint64_t sum[3] = {0, 0, 0};
      for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
          const std::size_t at = (static_cast<std::size_t>(y) * image.width + x) * 3;
          for (int c = 0; c < 3; ++c) sum[c] += image.rgb[at + c];
        }
      }
      const double n = 255.0 * static_cast<double>(x1 - x0) * static_cast<double>(y1 - y0);
      cells.push_back({sum[0] / n, sum[1] / n, sum[2] / n});
    }
  }
  return cells;
}

Palette2D make_palette_2d(const Image& image, const Palette& target, const Palette2DOptions& options) {
  target.validate();
  options.distance.validate();
  constexpr std::size_t kCells = kPaletteGrid * kPaletteGrid;
  const std::size_t k = target.size();

  Palette2D out;
  out.cells = downsample_grid(image, options.downsample);

  // Scale masses by 64k so both marginals are integral: k per cell, 64 per color.
  std::vector<std::int64_t> supply(kCells, static_cast<std::int64_t>(k));
  std::vector<std::int64_t> demand(k, static_cast<std::int64_t>(kCells));
  std::vector<ColorLab> palette_lab;
  for (const auto& c : target.colors) palette_lab.push_back(rgb_to_lab(c));
  std::vector<double> cost(kCells * k);
  for (std::size_t i = 0; i < kCells; ++i) {
    const ColorLab lab = rgb_to_lab(out.cells[i]);
    for (std::size_t j = 0; j < k; ++j) cost[i * k + j] = thresholded_distance(lab, palette_lab[j], options.distance);
  }
  const auto flows = solve_transport(supply, demand, cost, 1.0);

  const double total = static_cast<double>(kCells * k);
  std::vector<std::int64_t> best(kCells, 0);
  out.assignment.assign(kCells, 0);
  std::vector<double> terms;
  for (const auto& f : flows) {
    out.plan.flows.push_back({f.source, f.target, static_cast<double>(f.amount) / total});
    terms.push_back(static_cast<double>(f.amount) * cost[f.source * k + f.target]);
    // Flows arrive sorted by (source, target), so strict comparison keeps the lower index on ties.
    if (f.amount > best[f.source]) {
      best[f.source] = f.amount;
      out.assignment[f.source] = f.target;
    }
  }
  out.plan.total_cost = detail::compensated_sum(terms) / total;

  out.grid.reserve(kCells);
  for (auto a : out.assignment) out.grid.push_back(target.colors[a]);

  out.upsampled = Image(kPaletteUpsampled, kPaletteUpsampled);
  for (int y = 0; y < kPaletteUpsampled; ++y) {
    for (int x = 0; x < kPaletteUpsampled; ++x) {
      const auto& c = out.grid[(y * kPaletteGrid / kPaletteUpsampled) * kPaletteGrid + x * kPaletteGrid / kPaletteUpsampled];
      out.upsampled.set(x, y, to_u8(c.r), to_u8(c.g), to_u8(c.b));
    }
  }
  return out;
}

const AblationRow& AblationReport::best() const {
  if (rows.empty()) throw Error("ablation report has no rows");
  return rows.front();
}

AblationReport rank_blocks(std::vector<AblationRow> rows) {
  AblationReport report;
  for (auto& row : rows) {
    if (row.summary.count == 0) {
      report.warnings.push_back("block '" + row.block + "' has no runs; excluded");
    } else {
      report.rows.push_back(std::move(row));
    }
  }
  std::sort(report.rows.begin(), report.rows.end(), [](const AblationRow& a, const AblationRow& b) {
    return a.summary.mean != b.summary.mean ? a.summary.mean < b.summary.mean : a.block < b.block;
  });
  return report;
}

AblationReport ablation_report(const std::map<std::string, std::vector<double>>& emds) {
  std::vector<AblationRow> rows;
  for (const auto& [block, values] : emds) rows.push_back({block, summarize(values)});
  return rank_blocks(std::move(rows));
}

AblationReport ablation_report(const std::map<std::string, std::vector<AblationSample>>& runs,
                               const EvalParams& params) {
  params.distance.validate();
  const GroundDistance ground(params.distance);
  std::map<std::string, std::vector<double>> emds;
  for (const auto& [block, samples] : runs) {
    auto& values = emds[block];
    values.resize(samples.size());
    parallel_for(samples.size(), params.threads,
                 [&](std::size_t i) { values[i] = palette_emd(samples[i].image, samples[i].palette, ground); });
  }
  return ablation_report(emds);
}

}  // namespace palette_forge
