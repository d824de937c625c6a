#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "fixtures.hpp"
#include "palette_forge/error.hpp"
#include "palette_forge/eval.hpp"

using namespace palette_forge;

namespace {

Palette solid_palette(std::uint8_t r, std::uint8_t g, std::uint8_t b) { return Palette{{rgb_from_u8(r, g, b)}, std::nullopt}; }

EvalCase make_case(std::string id, Palette p) { return EvalCase{std::move(id), std::move(p), "a photo", 0}; }

}  // namespace

TEST_CASE("caption filter") {
  CHECK(color_words().size() == 30);
  CHECK_FALSE(mentions_color("A dog on a couch"));
  CHECK(mentions_color("A red dress"));
  CHECK_FALSE(mentions_color("Infrared sensor display"));
  CHECK(mentions_color("NAVY-blue jacket"));
  CHECK(mentions_color("grey."));
  CHECK_FALSE(mentions_color("redwood tanned goldfish"));
  CHECK_FALSE(mentions_color(""));
  const auto checks = filter_color_captions({"a cat", "the white house"});
  REQUIRE(checks.size() == 2);
  CHECK(checks[0].passes);
  CHECK_FALSE(checks[1].passes);
}

TEST_CASE("summary statistics") {
  CHECK(summarize({}).count == 0);
  const auto s = summarize({0.2, 0.4});
  CHECK(s.count == 2);
  CHECK(s.mean == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(s.std == doctest::Approx(0.1).epsilon(1e-12));  // population std
  CHECK(summarize({5.0}).std == 0.0);
}

TEST_CASE("evaluation identity") {
  const std::vector<EvalCase> cases = {make_case("red", solid_palette(255, 0, 0)),
                                       make_case("teal", solid_palette(0, 128, 128))};
  const std::vector<std::optional<Image>> images = {Image(16, 16, 255, 0, 0), Image(8, 8, 0, 128, 128)};
  const auto report = evaluate(cases, images);
  CHECK(report.failed == 0);
  CHECK(report.summary.count == 2);
  CHECK(report.summary.mean == 0.0);
  CHECK(report.summary.std == 0.0);
  CHECK(EvalReport::kStdKind == "population");
}

TEST_CASE("evaluation mean of two cases and failures") {
  const GroundDistance g;
  const Image red(8, 8, 255, 0, 0);
  const auto blue = solid_palette(0, 0, 255);
  const auto green = solid_palette(0, 255, 0);
  const double a = palette_emd(red, blue, g);
  const double b = palette_emd(red, green, g);
  CHECK(a > 0.0);

  const std::vector<EvalCase> cases = {make_case("1", blue), make_case("2", green), make_case("3", blue)};
  const std::vector<std::optional<Image>> images = {red, red, std::nullopt};
  const auto report = evaluate(cases, images);
  CHECK(report.summary.count == 2);
  CHECK(report.summary.mean == doctest::Approx((a + b) / 2).epsilon(1e-15));
  CHECK(report.failed == 1);
  CHECK_FALSE(report.cases[2].emd.has_value());
  CHECK_FALSE(report.cases[2].error.empty());

  CHECK_THROWS_AS(evaluate(cases, std::vector<std::optional<Image>>{red}), Error);

  const auto loaded = evaluate(cases, [&](std::size_t i) -> Image {
    if (i == 1) throw IoError("unreadable");
    return red;
  });
  CHECK(loaded.failed == 1);
  CHECK(loaded.cases[1].error.find("unreadable") != std::string::npos);
}

TEST_CASE("evaluation is permutation invariant") {
  std::mt19937_64 rng(5);
  std::vector<EvalCase> cases;
  std::vector<std::optional<Image>> images;
  for (int i = 0; i < 24; ++i) {
    const auto img = fixtures::random_image(rng, 12, 12);
    cases.push_back(make_case(std::to_string(i), extract_median_cut(fixtures::random_image(rng, 6, 6).pixels(), 3)));
    images.emplace_back(img);
  }
  const auto reference = evaluate(cases, images);
  std::vector<std::size_t> order(cases.size());
  std::iota(order.begin(), order.end(), 0);
  for (int trial = 0; trial < 5; ++trial) {
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<EvalCase> c2;
    std::vector<std::optional<Image>> i2;
    for (auto o : order) {
      c2.push_back(cases[o]);
      i2.push_back(images[o]);
    }
    const auto r = evaluate(c2, i2, EvalParams{{}, static_cast<unsigned>(trial + 1)});
    CHECK(r.summary.mean == reference.summary.mean);
    CHECK(r.summary.std == reference.summary.std);
  }
}

TEST_CASE("downsample grid") {
  const auto board = fixtures::checkerboard(64, 64, 8, {255, 0, 0}, {0, 0, 255});
  const auto cells = downsample_grid(board);
  REQUIRE(cells.size() == 64);
  CHECK(cells[0] == rgb_from_u8(255, 0, 0));
  CHECK(cells[1] == rgb_from_u8(0, 0, 255));
  CHECK(downsample_grid(board, Downsample::Nearest) == cells);

  const auto tiny = downsample_grid(Image(3, 2, 10, 20, 30));
  for (const auto& c : tiny) CHECK(c == rgb_from_u8(10, 20, 30));

  Image halves(16, 16, 0, 0, 0);
  for (int y = 0; y < 16; ++y) halves.set(0, y, 255, 255, 255);
  CHECK(downsample_grid(halves)[0].r == doctest::Approx(0.5));
}

TEST_CASE("2D palette on a solid image") {
  const auto out = make_palette_2d(Image(40, 40, 10, 200, 30), solid_palette(10, 200, 30));
  for (auto a : out.assignment) CHECK(a == 0);
  CHECK(out.plan.total_cost == 0.0);
  CHECK(out.upsampled.width == 512);
  CHECK(out.upsampled.height == 512);
  CHECK(out.upsampled == Image(512, 512, 10, 200, 30));
}

TEST_CASE("2D palette on a checkerboard matches brute-force OT") {
  const auto board = fixtures::checkerboard(64, 64, 8, {255, 0, 0}, {0, 0, 255});
  const Palette pal{{rgb_from_u8(255, 0, 0), rgb_from_u8(0, 0, 255)}, std::nullopt};
  const auto out = make_palette_2d(board, pal);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) CHECK(out.assignment[y * 8 + x] == static_cast<std::uint32_t>((x + y) % 2));
  }
  CHECK(out.plan.total_cost == 0.0);
  CHECK(out.plan.flows.size() == 64);

  // Swapped palette order: the identity recoloring is still optimal.
  const Palette swapped{{pal.colors[1], pal.colors[0]}, std::nullopt};
  const auto sw = make_palette_2d(board, swapped);
  for (int i = 0; i < 64; ++i) CHECK(sw.grid[i] == out.grid[i]);

  // Non-trivial costs: palette colors near but not equal to the board colors.
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> byte(0, 255);
  for (int trial = 0; trial < 20; ++trial) {
    const auto rnd = [&] {
      return std::array<std::uint8_t, 3>{static_cast<std::uint8_t>(byte(rng)), static_cast<std::uint8_t>(byte(rng)),
                                         static_cast<std::uint8_t>(byte(rng))};
    };
    const auto img = fixtures::random_image(rng, 8, 8);
    const auto c0 = rnd();
    const auto c1 = rnd();
    const Palette p{{rgb_from_u8(c0[0], c0[1], c0[2]), rgb_from_u8(c1[0], c1[1], c1[2])}, std::nullopt};
    const auto res = make_palette_2d(img, p);

    std::vector<double> supply(64, 1.0 / 64);
    std::vector<std::array<double, 2>> cost(64);
    const auto cells = downsample_grid(img);
    for (int i = 0; i < 64; ++i) {
      for (int j = 0; j < 2; ++j) cost[i][j] = thresholded_distance(rgb_to_lab(cells[i]), rgb_to_lab(p.colors[j]), {});
    }
    CHECK(res.plan.total_cost == doctest::Approx(fixtures::two_target_ot(supply, {0.5, 0.5}, cost)).epsilon(1e-12));
  }
}

TEST_CASE("2D palette invariants") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const auto img = fixtures::random_image(rng, 50 + trial, 37 + 3 * trial);
    const std::size_t k = 1 + trial % 5;
    const auto pal = extract_median_cut(fixtures::random_image(rng, 10, 10).pixels(), static_cast<int>(k));
    const auto out = make_palette_2d(img, pal, {{}, trial % 2 ? Downsample::Nearest : Downsample::Box});
    for (const auto& c : out.grid) CHECK(std::find(pal.colors.begin(), pal.colors.end(), c) != pal.colors.end());

    std::vector<double> row(64, 0.0);
    std::vector<double> col(pal.size(), 0.0);
    for (const auto& f : out.plan.flows) {
      row[f.source] += f.mass;
      col[f.target] += f.mass;
    }
    for (double r : row) CHECK(std::abs(r - 1.0 / 64) <= 1e-9);
    for (double c : col) CHECK(std::abs(c - 1.0 / static_cast<double>(pal.size())) <= 1e-9);
  }
}

TEST_CASE("ablation ranking") {
  const Palette red = solid_palette(255, 0, 0);
  std::map<std::string, std::vector<AblationSample>> runs;
  runs["b.exact"] = {{Image(8, 8, 255, 0, 0), red}, {Image(4, 4, 255, 0, 0), red}};
  runs["a.off"] = {{Image(8, 8, 0, 0, 255), red}};
  runs["c.empty"] = {};
  const auto report = ablation_report(runs);
  REQUIRE(report.rows.size() == 2);
  CHECK(report.best().block == "b.exact");
  CHECK(report.best().summary.mean == 0.0);
  CHECK(report.warnings.size() == 1);

  const std::map<std::string, std::vector<double>> tie = {{"z", {0.3}}, {"y", {0.3}}, {"x", {0.1, 0.5}}};
  const auto t = ablation_report(tie);
  CHECK(t.rows[0].block == "x");
  CHECK(t.rows[1].block == "y");
  CHECK(t.rows[2].block == "z");

  CHECK(ablation_report(std::map<std::string, std::vector<double>>{{"only", {0.2}}}).rows.size() == 1);
  CHECK_THROWS_AS(ablation_report(std::map<std::string, std::vector<double>>{}).best(), Error);
}
