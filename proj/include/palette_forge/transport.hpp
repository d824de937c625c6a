#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "palette_forge/colorspace.hpp"
#include "palette_forge/histogram.hpp"
#include "palette_forge/palette.hpp"

namespace palette_forge {

/// Thresholded CIEDE2000 between bin centers.
///
/// Entries are evaluated on demand from the cached bin-center Lab colors; materialize()
/// fills a dense n x n table instead. Both paths return identical values. Copies share state.
class GroundDistance {
 public:
  explicit GroundDistance(DistanceParams params = {}, HistogramDims dims = kDefaultDims);

  const DistanceParams& params() const { return state_->params; }
  const HistogramDims& dims() const { return state_->dims; }
  std::size_t size() const { return state_->centers.size(); }
  const ColorLab& center(std::uint32_t flat) const { return state_->centers[flat]; }

  double operator()(std::uint32_t i, std::uint32_t j) const;

  /// Dense row-major table of every pair. Intended for small grids; the full grid needs ~133 MB.
  void materialize(unsigned threads = 0);
  bool is_materialized() const { return !state_->dense.empty(); }

 private:
  struct State {
    DistanceParams params;
    HistogramDims dims;
    std::vector<ColorLab> centers;
    std::vector<double> dense;
  };
  std::shared_ptr<State> state_;
};

/// A_ij = 1 - cost_ij over a ground distance, or an explicit matrix for tests.
class SimilarityMatrix {
 public:
  explicit SimilarityMatrix(GroundDistance ground);
  static SimilarityMatrix identity(std::size_t n);
  /// Row-major n x n values.
  static SimilarityMatrix dense(std::size_t n, std::vector<double> values);

  std::size_t size() const { return n_; }
  double operator()(std::uint32_t i, std::uint32_t j) const;

 private:
  SimilarityMatrix() = default;
  std::size_t n_ = 0;
  std::shared_ptr<const GroundDistance> ground_;
  std::vector<double> values_;
  bool identity_ = false;
};

struct Flow {
  std::uint32_t source = 0;
  std::uint32_t target = 0;
  double mass = 0.0;
};

struct TransportPlan {
  std::vector<Flow> flows;
  double total_cost = 0.0;
};

struct EmdResult {
  double cost = 0.0;
  TransportPlan plan;
};

/// Flow of a balanced integer transport problem; indices refer to supply/demand positions.
struct IntegerFlow {
  std::uint32_t source = 0;
  std::uint32_t target = 0;
  std::int64_t amount = 0;
};

/// Exact min-cost flow for balanced integer supplies and demands.
///
/// `cost` is row-major supply x demand. Pairs whose cost is >= `saturation` are not added
/// as edges; instead every source reaches every sink through one transshipment node at
/// cost `saturation`, which is exact when costs are clipped at that level.
std::vector<IntegerFlow> solve_transport(std::span<const std::int64_t> supply,
                                         std::span<const std::int64_t> demand,
                                         std::span<const double> cost, double saturation);

/// Exact EMD between normalized histograms over the ground distance's grid.
EmdResult emd(const HsvHistogram& p, const HsvHistogram& q, const GroundDistance& ground);

/// Dense two-phase simplex over the transport LP. Independent of solve_transport.
double transport_lp(std::span<const double> supply, std::span<const double> demand,
                    std::span<const double> cost);

inline constexpr std::size_t kOracleMaxBins = 64;

/// EMD through transport_lp; at most kOracleMaxBins nonzero bins across both histograms.
double emd_oracle(const HsvHistogram& p, const HsvHistogram& q, const GroundDistance& ground);

/// Quadratic-Chi histogram distance with normalization exponent m in [0,1).
double quadratic_chi(const HsvHistogram& p, const HsvHistogram& q, const SimilarityMatrix& similarity,
                     double m = 0.5);

/// Quadratic-Chi between a palette's sparse histogram and an image histogram (m = 0.5 default).
double palette_image_distance(const Palette& palette, const HsvHistogram& image_hist,
                              const GroundDistance& ground, double m = 0.5);

}  // namespace palette_forge
