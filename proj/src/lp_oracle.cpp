// Dense two-phase simplex for the transport LP. Only used to verify the min-cost-flow path,
// so it favors obvious correctness (full tableau, Bland's rule) over speed.

#include <cmath>
#include <limits>
#include <vector>

#include "palette_forge/error.hpp"
#include "palette_forge/transport.hpp"

namespace palette_forge {

namespace {

constexpr double kPivotEps = 1e-12;

class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * (cols + 1), 0.0) {}

  double& at(std::size_t r, std::size_t c) { return data_[r * (cols_ + 1) + c]; }
  double& rhs(std::size_t r) { return at(r, cols_); }

  void pivot(std::size_t pr, std::size_t pc, std::vector<double>& objective) {
    const double inv = 1.0 / at(pr, pc);
    for (std::size_t c = 0; c <= cols_; ++c) at(pr, c) *= inv;
    at(pr, pc) = 1.0;
    for (std::size_t r = 0; r < rows_; ++r) {
      if (r == pr) continue;
      const double f = at(r, pc);
      if (f == 0.0) continue;
      for (std::size_t c = 0; c <= cols_; ++c) at(r, c) -= f * at(pr, c);
      at(r, pc) = 0.0;
    }
    const double f = objective[pc];
    if (f != 0.0) {
      for (std::size_t c = 0; c <= cols_; ++c) objective[c] -= f * at(pr, c);
      objective[pc] = 0.0;
    }
  }

  std::size_t rows() const { return rows_; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

// Minimizes over columns [0, allowed) with Bland's rule. `objective` holds reduced costs
// with the negated objective value in its last slot.
void run_simplex(Tableau& t, std::vector<double>& objective, std::vector<std::size_t>& basis, std::size_t allowed) {
  for (;;) {
    std::size_t enter = allowed;
    for (std::size_t c = 0; c < allowed; ++c) {
      if (objective[c] < -kPivotEps) {
        enter = c;
        break;
      }
    }
    if (enter == allowed) return;

    std::size_t leave = t.rows();
    double best_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < t.rows(); ++r) {
      const double a = t.at(r, enter);
      if (a <= kPivotEps) continue;
      const double ratio = t.rhs(r) / a;
      if (ratio < best_ratio - kPivotEps ||
          (std::abs(ratio - best_ratio) <= kPivotEps && basis[r] < basis[leave])) {
        best_ratio = ratio;
        leave = r;
      }
    }
    if (leave == t.rows()) throw Error("transport LP is unbounded");
    t.pivot(leave, enter, objective);
    basis[leave] = enter;
  }
}

}  // namespace

double transport_lp(std::span<const double> supply, std::span<const double> demand, std::span<const double> cost) {
  const std::size_t n = supply.size();
  const std::size_t m = demand.size();
  if (cost.size() != n * m) throw Error("cost matrix does not match supply x demand");
  if (n == 0 || m == 0) return 0.0;

  const std::size_t vars = n * m;
  const std::size_t rows = n + m;
  const std::size_t cols = vars + rows;  // transport variables, then one artificial per row
  Tableau t(rows, cols);
  std::vector<std::size_t> basis(rows);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) t.at(i, i * m + j) = 1.0;
    t.rhs(i) = supply[i];
  }
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < n; ++i) t.at(n + j, i * m + j) = 1.0;
    t.rhs(n + j) = demand[j];
  }
  for (std::size_t r = 0; r < rows; ++r) {
    t.at(r, vars + r) = 1.0;
    basis[r] = vars + r;
  }

  // Phase 1: minimize the sum of artificials.
  std::vector<double> objective(cols + 1, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < vars; ++c) objective[c] -= t.at(r, c);
    objective[cols] -= t.rhs(r);
  }
  run_simplex(t, objective, basis, vars);
  if (-objective[cols] > 1e-9) throw Error("transport LP is infeasible (unbalanced masses)");

  // Pivot remaining artificials out where possible; rows that cannot pivot are redundant.
  for (std::size_t r = 0; r < rows; ++r) {
    if (basis[r] < vars) continue;
    for (std::size_t c = 0; c < vars; ++c) {
      if (std::abs(t.at(r, c)) > kPivotEps) {
        t.pivot(r, c, objective);
        basis[r] = c;
        break;
      }
    }
  }

  // Phase 2: reduced costs of the real objective with respect to the current basis.
  std::fill(objective.begin(), objective.end(), 0.0);
  for (std::size_t c = 0; c < vars; ++c) objective[c] = cost[c];
  for (std::size_t r = 0; r < rows; ++r) {
    if (basis[r] >= vars) continue;
    const double cb = cost[basis[r]];
    if (cb == 0.0) continue;
    for (std::size_t c = 0; c <= cols; ++c) objective[c] -= cb * t.at(r, c);
  }
  run_simplex(t, objective, basis, vars);

  double total = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (basis[r] < vars) total += cost[basis[r]] * t.rhs(r);
  }
  return total;
}

}  // namespace palette_forge
