#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "palette_forge/error.hpp"
#include "palette_forge/json_io.hpp"

using namespace palette_forge;

TEST_CASE("palette json round trip") {
  const Palette p{{rgb_from_u8(255, 0, 0), rgb_from_u8(18, 52, 171)}, std::vector<double>{0.25, 0.75}};
  const auto j = palette_to_json(p);
  CHECK(j["colors"][1] == "#1234AB");
  CHECK(palette_from_json(j) == p);
  const Palette plain{{rgb_from_u8(1, 2, 3)}, std::nullopt};
  CHECK_FALSE(palette_to_json(plain).contains("weights"));
  CHECK(palette_from_json(palette_to_json(plain)) == plain);
  CHECK_THROWS_AS(palette_from_json(Json{{"colors", Json::array()}}), Error);
  CHECK_THROWS_AS(palette_from_json(Json{{"colors", {"red"}}}), Error);

  const auto dir = fixtures::scratch_dir("json_io");
  write_palette((dir / "p.json").string(), p);
  CHECK(read_palette((dir / "p.json").string()) == p);
  write_text_file((dir / "broken.json").string(), "{not json");
  CHECK_THROWS_AS(read_json_file((dir / "broken.json").string()), FormatError);
  CHECK_THROWS_AS(read_json_file((dir / "missing.json").string()), IoError);
}

TEST_CASE("histogram json round trip") {
  std::mt19937_64 rng(1);
  const auto h = fixtures::random_sparse_histogram(rng, 30);
  const auto j = histogram_to_json(h);
  CHECK(j["dims"] == Json::array({34, 12, 10}));
  CHECK(histogram_from_json(j) == h);
  auto bad = j;
  bad["bins"]["9999"] = 0.1;
  CHECK_THROWS_AS(histogram_from_json(bad), Error);
}

TEST_CASE("corpus stats json") {
  const auto stats = scan_corpus(std::vector<Image>{Image(2, 2, 255, 0, 0), Image(2, 2, 0, 0, 255)});
  const auto j = stats_to_json(stats);
  CHECK(j["image_count"] == 2);
  CHECK(j["bins"].size() == 512);
  const auto back = stats_from_json(j);
  CHECK(back.image_count == 2);
  CHECK(back.per_bin_share() == stats.per_bin_share());
}

TEST_CASE("config parsing") {
  const Config defaults = config_from_json(Json::object());
  CHECK(defaults.distance.threshold == 20.0);
  CHECK(defaults.distance.sharpen_exponent == 1.0);
  CHECK(defaults.tau == 0.05);
  CHECK(defaults.rare_k == 100);

  const auto j = Json::parse(R"({"distance": {"threshold": 30, "gamma": 2, "m": 0.9},
                                 "dropout": {"color": [0.5, 0.3, 0.2], "text_keep": [1, 1, 0], "entropy_drop": 0},
                                 "curation": {"tau": 0.1, "rare_k": 50},
                                 "palette": {"colors": 6, "eval_colors": 4},
                                 "eval": {"downsample": "nearest"},
                                 "seed": 7, "threads": 2})");
  const auto c = config_from_json(j);
  CHECK(c.distance.threshold == 30.0);
  CHECK(c.qc_exponent == 0.9);
  CHECK(c.dropout.color_probs[2] == 0.2);
  CHECK(c.rare_k == 50);
  CHECK(c.downsample == Downsample::Nearest);
  CHECK(c.seed == 7);
  CHECK(config_to_json(config_from_json(config_to_json(c))) == config_to_json(c));

  CHECK_THROWS_AS(config_from_json(Json::parse(R"({"colour": 1})")), Error);
  CHECK_THROWS_AS(config_from_json(Json::parse(R"({"distance": {"threshold": -1}})")), Error);
  CHECK_THROWS_AS(config_from_json(Json::parse(R"({"dims": [16, 4, 4]})")), Error);
  CHECK_THROWS_AS(config_from_json(Json::parse(R"({"curation": {"tau": 2}})")), Error);
  CHECK_THROWS_AS(config_from_json(Json::parse(R"({"dropout": {"color": [0.5, 0.5, 0.5]}})")), Error);
}
