#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "fixtures.hpp"
#include "palette_forge/error.hpp"
#include "palette_forge/transport.hpp"

using namespace palette_forge;

namespace {

HsvHistogram delta_at(std::uint32_t bin, const HistogramDims& dims = kDefaultDims) {
  std::vector<double> m(dims.size(), 0.0);
  m[bin] = 1.0;
  return HsvHistogram(dims, std::move(m));
}

HsvHistogram mix(std::initializer_list<std::pair<std::uint32_t, double>> bins, const HistogramDims& dims = kDefaultDims) {
  std::vector<double> m(dims.size(), 0.0);
  for (const auto& [b, w] : bins) m[b] += w;
  return HsvHistogram(dims, std::move(m));
}

}  // namespace

TEST_CASE("ground distance") {
  const GroundDistance g;
  CHECK(g.size() == 4080);
  CHECK(g(5, 5) == 0.0);
  CHECK(g(5, 900) == g(900, 5));
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::uint32_t> bin(0, 4079);
  for (int i = 0; i < 1000; ++i) {
    const auto a = bin(rng);
    const auto b = bin(rng);
    CHECK(g(a, b) >= 0.0);
    CHECK(g(a, b) <= 1.0);
  }

  GroundDistance small(DistanceParams{}, HistogramDims{6, 3, 4});
  const GroundDistance lazy(DistanceParams{}, HistogramDims{6, 3, 4});
  small.materialize(2);
  CHECK(small.is_materialized());
  CHECK_FALSE(lazy.is_materialized());
  for (std::uint32_t i = 0; i < small.size(); ++i) {
    for (std::uint32_t j = 0; j < small.size(); ++j) CHECK(small(i, j) == lazy(i, j));
  }
}

TEST_CASE("EMD on hand-built cases") {
  const GroundDistance g;
  const auto a = delta_at(119);
  const auto b = delta_at(2000);
  CHECK(emd(a, a, g).cost == 0.0);
  CHECK(emd(a, b, g).cost == doctest::Approx(g(119, 2000)).epsilon(1e-12));
  const auto half = mix({{119, 0.5}, {2000, 0.5}});
  CHECK(emd(half, a, g).cost == doctest::Approx(0.5 * g(119, 2000)).epsilon(1e-12));

  const auto r = emd(half, a, g);
  REQUIRE(r.plan.flows.size() == 2);
  double moved = 0.0;
  for (const auto& f : r.plan.flows) moved += f.mass;
  CHECK(moved == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(emd(HsvHistogram(), a, g), Error);
  CHECK_THROWS_AS(emd(a, delta_at(3, HistogramDims{2, 2, 2}), g), Error);
}

TEST_CASE("EMD agrees with the LP oracle") {
  const GroundDistance g;
  std::mt19937_64 rng(2);
  for (int i = 0; i < 60; ++i) {
    const auto p = fixtures::random_sparse_histogram(rng, 12);
    const auto q = fixtures::random_sparse_histogram(rng, 12);
    CHECK(std::abs(emd(p, q, g).cost - emd_oracle(p, q, g)) <= 1e-9);
  }
  // Sharpened ground distances are not saturated at 1 the same way; the solver must still agree.
  const GroundDistance sharp(DistanceParams{35.0, 2.5});
  for (int i = 0; i < 30; ++i) {
    const auto p = fixtures::random_sparse_histogram(rng, 10);
    const auto q = fixtures::random_sparse_histogram(rng, 10);
    CHECK(std::abs(emd(p, q, sharp).cost - emd_oracle(p, q, sharp)) <= 1e-9);
  }
}

TEST_CASE("EMD is exactly symmetric and zero on identical inputs") {
  const GroundDistance g;
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    const auto p = fixtures::random_sparse_histogram(rng, 40);
    const auto q = fixtures::random_sparse_histogram(rng, 40);
    CHECK(emd(p, q, g).cost == emd(q, p, g).cost);
    CHECK(emd(p, p, g).cost == 0.0);
  }
}

TEST_CASE("solve_transport matches the two-target oracle") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.3);
  std::uniform_int_distribution<std::int64_t> units(1, 9);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + trial % 15;
    std::vector<std::int64_t> supply(n);
    for (auto& s : supply) s = units(rng);
    const std::int64_t total = std::accumulate(supply.begin(), supply.end(), std::int64_t{0});
    std::uniform_int_distribution<std::int64_t> cut(0, total);
    const std::int64_t d0 = cut(rng);
    const std::vector<std::int64_t> demand = {d0, total - d0};

    std::vector<double> cost(n * 2);
    std::vector<std::array<double, 2>> cost2(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (int j = 0; j < 2; ++j) {
        // Costs above the saturation level are clipped, as the hub construction assumes.
        cost[i * 2 + j] = std::min(u(rng), 1.0);
        cost2[i][j] = cost[i * 2 + j];
      }
    }
    const auto flows = solve_transport(supply, demand, cost, 1.0);
    double got = 0.0;
    std::vector<std::int64_t> out(n, 0);
    std::array<std::int64_t, 2> in{0, 0};
    for (const auto& f : flows) {
      CHECK(f.amount > 0);
      got += static_cast<double>(f.amount) * cost[f.source * 2 + f.target];
      out[f.source] += f.amount;
      in[f.target] += f.amount;
    }
    CHECK(out == supply);
    CHECK(in[0] == demand[0]);
    CHECK(in[1] == demand[1]);

    std::vector<double> s(supply.begin(), supply.end());
    const double want = fixtures::two_target_ot(s, {static_cast<double>(demand[0]), static_cast<double>(demand[1])}, cost2);
    CHECK(got == doctest::Approx(want).epsilon(1e-12));
    CHECK(transport_lp(s, std::vector<double>{static_cast<double>(demand[0]), static_cast<double>(demand[1])}, cost) ==
          doctest::Approx(want).epsilon(1e-9));
  }
}

TEST_CASE("solve_transport rejects malformed problems") {
  const std::vector<std::int64_t> s = {1, 2};
  const std::vector<std::int64_t> d = {2, 2};
  const std::vector<double> c(4, 0.5);
  CHECK_THROWS_AS(solve_transport(s, d, c, 1.0), Error);
  const std::vector<std::int64_t> d3 = {3};
  CHECK_THROWS_AS(solve_transport(s, d3, c, 1.0), Error);
  const std::vector<std::int64_t> neg = {-1, 4};
  CHECK_THROWS_AS(solve_transport(neg, d3, std::vector<double>(2, 0.5), 1.0), Error);
}

TEST_CASE("transport LP on a textbook instance") {
  // Optimum 80 (plan [[20,0,10],[0,20,0],[0,0,10]]), frozen from scipy.optimize.linprog.
  const std::vector<double> supply = {30, 20, 10};
  const std::vector<double> demand = {20, 20, 20};
  const std::vector<double> cost = {1, 2, 3,  //
                                    4, 1, 2,  //
                                    3, 3, 1};
  CHECK(transport_lp(supply, demand, cost) == doctest::Approx(80.0).epsilon(1e-12));
  CHECK_THROWS_AS(transport_lp(supply, std::vector<double>{1, 2, 3}, cost), Error);
}

TEST_CASE("Quadratic-Chi reductions") {
  const HistogramDims two{2, 1, 1};
  const auto p = delta_at(0, two);
  const auto q = delta_at(1, two);
  const auto id = SimilarityMatrix::identity(2);
  CHECK(quadratic_chi(p, q, id, 0.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(quadratic_chi(p, p, id, 0.0) == 0.0);

  const HistogramDims four{4, 1, 1};
  const auto a = mix({{0, 0.5}, {1, 0.25}, {2, 0.25}}, four);
  const auto b = mix({{1, 0.5}, {3, 0.5}}, four);
  // Euclidean norm of (0.5, -0.25, 0.25, -0.5) = sqrt(0.625).
  CHECK(quadratic_chi(a, b, SimilarityMatrix::identity(4), 0.0) == doctest::Approx(std::sqrt(0.625)).epsilon(1e-15));

  const GroundDistance g;
  const SimilarityMatrix sim(g);
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    const auto x = fixtures::random_sparse_histogram(rng, 30);
    const auto y = fixtures::random_sparse_histogram(rng, 30);
    CHECK(quadratic_chi(x, y, sim) == quadratic_chi(y, x, sim));
    CHECK(quadratic_chi(x, x, sim) == 0.0);
    CHECK(quadratic_chi(x, y, sim) >= 0.0);
  }
  CHECK_THROWS_AS(quadratic_chi(p, q, id, 1.0), Error);
  CHECK_THROWS_AS(quadratic_chi(p, q, SimilarityMatrix::identity(3), 0.5), Error);
}

TEST_CASE("palette to image distance") {
  const GroundDistance g;
  const Palette red{{{1, 0, 0}}, std::nullopt};
  const auto h = palette_to_histogram(red);
  CHECK(palette_image_distance(red, h, g) == 0.0);
  const Palette blue{{{0, 0, 1}}, std::nullopt};
  CHECK(palette_image_distance(blue, h, g) > 0.0);
}
