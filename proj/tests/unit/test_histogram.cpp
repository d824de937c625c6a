#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "fixtures.hpp"
#include "palette_forge/error.hpp"
#include "palette_forge/histogram.hpp"
#include "palette_forge/image.hpp"

using namespace palette_forge;

TEST_CASE("dims and bin indexing") {
  CHECK(kDefaultDims.size() == 4080);
  const auto b = BinIndex::from_components(3, 7, 2);
  CHECK(b.flat == (3u * 12 + 7) * 10 + 2);
  CHECK(BinIndex::from_flat(b.flat) == b);
  CHECK_THROWS_AS(BinIndex::from_flat(4080), Error);
  CHECK_THROWS_AS(BinIndex::from_components(34, 0, 0), Error);
  CHECK_THROWS_AS((HistogramDims{0, 12, 10}.validate()), Error);
}

TEST_CASE("binning boundaries") {
  CHECK(bin_of({0, 0, 0}).flat == 0);
  CHECK(bin_of({0, 1, 1}) == BinIndex::from_components(0, 11, 9));
  CHECK(bin_of({359.9999, 0.5, 0.5}).h_bin == 33);
  CHECK(bin_of({0, 0.0833, 0.1}).s_bin == 0);   // 0.0833 * 12 < 1
  CHECK(bin_of({0, 1.0 / 12.0, 0.1}).s_bin == 1);
  CHECK(bin_of({0, 0, 0.1}).v_bin == 1);
  CHECK(flat_bin_of_u8(255, 0, 0) == 119);

  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> byte(0, 255);
  for (int i = 0; i < 20000; ++i) {
    const auto r = static_cast<std::uint8_t>(byte(rng));
    const auto g = static_cast<std::uint8_t>(byte(rng));
    const auto bl = static_cast<std::uint8_t>(byte(rng));
    CHECK(flat_bin_of_u8(r, g, bl) == bin_of(rgb_to_hsv(rgb_from_u8(r, g, bl))).flat);
  }
}

TEST_CASE("bin centers match frozen values") {
  const auto b = BinIndex::from_components(0, 0, 0);
  const auto rgb = hsv_to_rgb(bin_center_hsv(b));
  CHECK(std::abs(rgb.r - 0.05) <= 1e-12);
  CHECK(std::abs(rgb.g - 0.048100490196) <= 1e-11);
  CHECK(std::abs(rgb.b - 0.047916666667) <= 1e-11);
  // scikit-image rgb2lab of the center color above.
  const auto lab = bin_center_lab(b);
  CHECK(std::abs(lab.L - 3.4342548254442917) <= 1e-9);
  CHECK(std::abs(lab.a - 0.13777492296136729) <= 1e-9);
  CHECK(std::abs(lab.b - 0.07170182173479867) <= 1e-9);
}

TEST_CASE("histogram of an image") {
  const Image red(16, 16, 255, 0, 0);
  const auto h = histogram_of_image(red);
  CHECK(h.is_normalized());
  CHECK(h[119] == 1.0);
  CHECK(h.support() == std::vector<std::uint32_t>{119});

  std::mt19937_64 rng(2);
  const auto noise = fixtures::random_image(rng, 300, 257);
  const auto reference = histogram_of_image(noise.pixels());
  CHECK(reference.is_normalized());
  for (unsigned threads : {1u, 2u, 3u, 8u}) CHECK(histogram_of_image(noise, kDefaultDims, threads) == reference);

  CHECK_THROWS_AS(histogram_of_image(std::span<const ColorRgb>{}), Error);
  CHECK_THROWS_AS(histogram_of_image(Image{}), Error);
}

TEST_CASE("histogram construction validates masses") {
  CHECK_THROWS_AS(HsvHistogram(kDefaultDims, std::vector<double>(10, 0.0)), Error);
  std::vector<double> negative(4080, 0.0);
  negative[0] = -0.5;
  CHECK_THROWS_AS(HsvHistogram(kDefaultDims, negative), Error);
  std::vector<double> nan(4080, 0.0);
  nan[3] = NAN;
  CHECK_THROWS_AS(HsvHistogram(kDefaultDims, nan), Error);
  CHECK(HsvHistogram().is_zero());
  CHECK_FALSE(HsvHistogram().is_normalized());
}

TEST_CASE("entropy analytics") {
  std::vector<double> delta(4080, 0.0);
  delta[17] = 1.0;
  CHECK(entropy(HsvHistogram(kDefaultDims, delta)) == 0.0);

  const HsvHistogram uniform(kDefaultDims, std::vector<double>(4080, 1.0 / 4080.0));
  CHECK(std::abs(entropy(uniform) - std::log2(4080.0)) <= 1e-12);

  std::vector<double> eight(4080, 0.0);
  for (int i = 0; i < 8; ++i) eight[i * 500] = 0.125;
  CHECK(entropy(HsvHistogram(kDefaultDims, eight)) == 3.0);

  std::vector<double> half(4080, 0.0);
  half[0] = 0.5;
  CHECK_THROWS_WITH_AS(entropy(HsvHistogram(kDefaultDims, half)), "histogram not normalized", Error);
}

TEST_CASE("normalize") {
  std::vector<double> m(4080, 0.0);
  m[1] = 2.0;
  m[2] = 6.0;
  const auto n = normalize(HsvHistogram(kDefaultDims, m));
  CHECK(n.is_normalized());
  CHECK(n[1] == 0.25);
  CHECK(n[2] == 0.75);
  CHECK(normalize(n) == n);
  CHECK_THROWS_AS(normalize(HsvHistogram()), Error);
}

TEST_CASE("sparse round trip") {
  std::mt19937_64 rng(3);
  const auto h = fixtures::random_sparse_histogram(rng, 20);
  const auto sparse = h.to_sparse();
  CHECK(HsvHistogram::from_sparse(sparse) == h);
  auto bad = sparse;
  bad.bins.push_back({5000, 0.1});
  CHECK_THROWS_AS(HsvHistogram::from_sparse(bad), Error);
}

TEST_CASE("PHST encoding") {
  std::vector<double> m(4080, 0.0);
  m[0] = 0.25;
  m[4079] = 0.75;
  const HsvHistogram h(kDefaultDims, m);
  const auto bytes = encode_phst(h);
  CHECK(bytes.size() == phst_size(kDefaultDims));
  CHECK(bytes.size() == 4 + 2 + 6 + 4 * 4080);
  CHECK(bytes[0] == 'P');
  CHECK(bytes[4] == 1);
  CHECK(bytes[5] == 0);
  CHECK(decode_phst(bytes) == h);  // exactly representable masses survive float32

  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(decode_phst(bad_magic), FormatError);
  auto bad_version = bytes;
  bad_version[4] = 9;
  CHECK_THROWS_AS(decode_phst(bad_version), FormatError);
  auto bad_dims = bytes;
  bad_dims[6] = 33;
  CHECK_THROWS_AS(decode_phst(bad_dims), FormatError);
  CHECK_THROWS_AS(decode_phst(std::span(bytes).first(100)), FormatError);

  std::size_t consumed = 0;
  auto padded = bytes;
  padded.push_back(0);
  CHECK(decode_phst(padded, &consumed) == h);
  CHECK(consumed == bytes.size());

  const auto dir = fixtures::scratch_dir("phst");
  const auto path = (dir / "h.phst").string();
  write_phst(path, h);
  CHECK(read_phst(path) == h);
  {
    std::ofstream out(path, std::ios::app | std::ios::binary);
    out.put(0);
  }
  CHECK_THROWS_AS(read_phst(path), FormatError);
  CHECK_THROWS_AS(read_phst((dir / "missing.phst").string()), IoError);
}

TEST_CASE("float32 storage keeps histograms within renormalization reach") {
  std::mt19937_64 rng(4);
  const auto noise = fixtures::random_image(rng, 64, 64);
  const auto h = histogram_of_image(noise);
  const auto back = normalize(decode_phst(encode_phst(h)));
  CHECK(back.is_normalized());
  for (std::size_t i = 0; i < h.size(); ++i) CHECK(std::abs(back[i] - h[i]) <= 1e-7 * h[i] + 1e-12);
}
