#include "palette_forge/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "palette_forge/error.hpp"
#include "palette_forge/parallel.hpp"
#include "summation.hpp"

namespace palette_forge {

namespace {

// Mass quantum for the integer flow problem: 2^40 units per unit of histogram mass.
constexpr double kMassScale = 1099511627776.0;

void require_normalized(const HsvHistogram& h, const char* what) {
  if (!h.is_normalized()) throw Error(std::string(what) + " histogram not normalized");
}

void require_dims(const HsvHistogram& h, const HistogramDims& dims) {
  if (h.dims() != dims) throw Error("histogram dimensions do not match the ground distance");
}

// Rounds masses to integer units with an exactly balanced total.
std::vector<std::int64_t> quantize(std::span<const double> mass) {
  const double total = detail::compensated_sum(mass);
  std::vector<std::int64_t> units(mass.size());
  std::int64_t sum = 0;
  for (std::size_t i = 0; i < mass.size(); ++i) {
    units[i] = std::llround(mass[i] / total * kMassScale);
    sum += units[i];
  }
  const auto largest = static_cast<std::size_t>(std::max_element(units.begin(), units.end()) - units.begin());
  units[largest] += static_cast<std::int64_t>(kMassScale) - sum;
  return units;
}

std::vector<double> masses_at(const HsvHistogram& h, std::span<const std::uint32_t> bins) {
  std::vector<double> out;
  out.reserve(bins.size());
  for (std::uint32_t b : bins) out.push_back(h[b]);
  return out;
}

}  // namespace

GroundDistance::GroundDistance(DistanceParams params, HistogramDims dims) : state_(std::make_shared<State>()) {
  params.validate();
  dims.validate();
  state_->params = params;
  state_->dims = dims;
  state_->centers.reserve(dims.size());
  for (std::uint32_t i = 0; i < dims.size(); ++i) {
    state_->centers.push_back(bin_center_lab(BinIndex::from_flat(i, dims), dims));
  }
}

double GroundDistance::operator()(std::uint32_t i, std::uint32_t j) const {
  if (!state_->dense.empty()) return state_->dense[std::size_t{i} * size() + j];
  if (i == j) return 0.0;
  return thresholded_distance(state_->centers[i], state_->centers[j], state_->params);
}

void GroundDistance::materialize(unsigned threads) {
  if (is_materialized()) return;
  const std::size_t n = size();
  auto next = std::make_shared<State>(*state_);
  next->dense.assign(n * n, 0.0);
  parallel_for(n, threads, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = thresholded_distance(next->centers[i], next->centers[j], next->params);
      next->dense[i * n + j] = d;
      next->dense[j * n + i] = d;
    }
  });
  state_ = std::move(next);
}

SimilarityMatrix::SimilarityMatrix(GroundDistance ground)
    : n_(ground.size()), ground_(std::make_shared<const GroundDistance>(std::move(ground))) {}

SimilarityMatrix SimilarityMatrix::identity(std::size_t n) {
  SimilarityMatrix out;
  out.n_ = n;
  out.identity_ = true;
  return out;
}

SimilarityMatrix SimilarityMatrix::dense(std::size_t n, std::vector<double> values) {
  if (values.size() != n * n) throw Error("similarity matrix must be n x n");
  SimilarityMatrix out;
  out.n_ = n;
  out.values_ = std::move(values);
  return out;
}

double SimilarityMatrix::operator()(std::uint32_t i, std::uint32_t j) const {
  if (identity_) return i == j ? 1.0 : 0.0;
  if (ground_) return 1.0 - (*ground_)(i, j);
  return values_[std::size_t{i} * n_ + j];
}

EmdResult emd(const HsvHistogram& p, const HsvHistogram& q, const GroundDistance& ground) {
  require_normalized(p, "source");
  require_normalized(q, "target");
  require_dims(p, ground.dims());
  require_dims(q, ground.dims());

  // Solve in a canonical argument order so that emd(p, q) and emd(q, p) agree bit for bit.
  if (std::lexicographical_compare(q.mass().begin(), q.mass().end(), p.mass().begin(), p.mass().end())) {
    EmdResult flipped = emd(q, p, ground);
    for (auto& f : flipped.plan.flows) std::swap(f.source, f.target);
    std::sort(flipped.plan.flows.begin(), flipped.plan.flows.end(),
              [](const Flow& a, const Flow& b) { return std::tie(a.source, a.target) < std::tie(b.source, b.target); });
    return flipped;
  }

  const auto sp = p.support();
  const auto sq = q.support();
  const auto supply = quantize(masses_at(p, sp));
  const auto demand = quantize(masses_at(q, sq));

  std::vector<double> cost(sp.size() * sq.size());
  for (std::size_t i = 0; i < sp.size(); ++i) {
    for (std::size_t j = 0; j < sq.size(); ++j) cost[i * sq.size() + j] = ground(sp[i], sq[j]);
  }

  EmdResult result;
  std::vector<double> terms;
  for (const auto& f : solve_transport(supply, demand, cost, 1.0)) {
    const double mass = static_cast<double>(f.amount) / kMassScale;
    const double c = cost[f.source * sq.size() + f.target];
    result.plan.flows.push_back({sp[f.source], sq[f.target], mass});
    terms.push_back(mass * c);
  }
  result.cost = std::clamp(detail::compensated_sum(terms), 0.0, 1.0);
  result.plan.total_cost = result.cost;
  return result;
}

double emd_oracle(const HsvHistogram& p, const HsvHistogram& q, const GroundDistance& ground) {
  require_normalized(p, "source");
  require_normalized(q, "target");
  require_dims(p, ground.dims());
  require_dims(q, ground.dims());
  const auto sp = p.support();
  const auto sq = q.support();
  if (sp.size() + sq.size() > kOracleMaxBins) throw Error("instance too large for the LP oracle");

  std::vector<double> cost(sp.size() * sq.size());
  for (std::size_t i = 0; i < sp.size(); ++i) {
    for (std::size_t j = 0; j < sq.size(); ++j) cost[i * sq.size() + j] = ground(sp[i], sq[j]);
  }
  return transport_lp(masses_at(p, sp), masses_at(q, sq), cost);
}

double quadratic_chi(const HsvHistogram& p, const HsvHistogram& q, const SimilarityMatrix& similarity, double m) {
  require_normalized(p, "first");
  require_normalized(q, "second");
  if (p.dims() != q.dims()) throw Error("histogram dimensions differ");
  if (similarity.size() != p.size()) throw Error("similarity matrix does not match histogram size");
  if (!(m >= 0.0 && m < 1.0)) throw Error("Quadratic-Chi exponent m must lie in [0,1)");

  // Bins outside the union support have P_i = Q_i = 0 and contribute nothing.
  std::vector<std::uint32_t> bins;
  for (std::uint32_t i = 0; i < p.size(); ++i) {
    if (p[i] != 0.0 || q[i] != 0.0) bins.push_back(i);
  }

  const std::size_t k = bins.size();
  std::vector<double> a(k * k);
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t c = 0; c < k; ++c) a[r * k + c] = similarity(bins[r], bins[c]);
  }

  std::vector<double> z(k, 0.0);
  std::vector<double> terms(k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t c = 0; c < k; ++c) terms[c] = (p[bins[c]] + q[bins[c]]) * a[c * k + i];
    const double d = detail::compensated_sum(terms);
    if (d > 0.0) z[i] = (p[bins[i]] - q[bins[i]]) / std::pow(d, m);
  }

  std::vector<double> row(k);
  std::vector<double> outer(k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) row[j] = z[j] * a[i * k + j];
    outer[i] = z[i] * detail::compensated_sum(row);
  }
  return std::sqrt(std::max(0.0, detail::compensated_sum(outer)));
}

double palette_image_distance(const Palette& palette, const HsvHistogram& image_hist, const GroundDistance& ground,
                              double m) {
  return quadratic_chi(palette_to_histogram(palette, ground.dims()), image_hist, SimilarityMatrix(ground), m);
}

}  // namespace palette_forge
