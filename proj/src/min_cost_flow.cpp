#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <queue>
#include <vector>

#include "palette_forge/error.hpp"
#include "palette_forge/transport.hpp"

namespace palette_forge {

namespace {

// Reduced costs within this band count as zero when building the admissible subgraph.
constexpr double kAdmissibleSlack = 1e-10;

// Primal-dual successive shortest paths: Dijkstra on reduced costs for the distance
// labels, then a Dinic blocking flow over the zero-reduced-cost subgraph.
class FlowNetwork {
 public:
  explicit FlowNetwork(std::size_t nodes) : adj_(nodes), potential_(nodes, 0.0) {}

  std::size_t add_edge(std::uint32_t from, std::uint32_t to, std::int64_t capacity, double cost) {
    const std::size_t id = edges_.size();
    edges_.push_back({to, capacity, cost});
    edges_.push_back({from, 0, -cost});
    adj_[from].push_back(static_cast<std::uint32_t>(id));
    adj_[to].push_back(static_cast<std::uint32_t>(id + 1));
    return id;
  }

  std::int64_t flow_on(std::size_t edge) const { return edges_[edge ^ 1].capacity; }

  void run(std::uint32_t source, std::uint32_t sink, std::int64_t required) {
    std::int64_t sent = 0;
    while (sent < required) {
      if (!update_potentials(source, sink)) throw Error("transport problem is infeasible");
      sent += blocking_flow(source, sink, required - sent);
    }
  }

 private:
  struct Edge {
    std::uint32_t to;
    std::int64_t capacity;
    double cost;
  };

  double reduced_cost(std::uint32_t from, const Edge& e) const {
    return e.cost + potential_[from] - potential_[e.to];
  }

  bool update_potentials(std::uint32_t source, std::uint32_t sink) {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(adj_.size(), kInf);
    using Item = std::pair<double, std::uint32_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    dist[source] = 0.0;
    queue.push({0.0, source});
    while (!queue.empty()) {
      const auto [d, u] = queue.top();
      queue.pop();
      if (d > dist[u]) continue;
      if (u == sink) break;
      for (std::uint32_t id : adj_[u]) {
        const Edge& e = edges_[id];
        if (e.capacity <= 0) continue;
        const double nd = d + std::max(0.0, reduced_cost(u, e));
        if (nd < dist[e.to]) {
          dist[e.to] = nd;
          queue.push({nd, e.to});
        }
      }
    }
    const double reach = dist[sink];
    if (reach == kInf) return false;
    for (std::size_t v = 0; v < adj_.size(); ++v) potential_[v] += std::min(dist[v], reach);
    return true;
  }

  bool admissible(std::uint32_t from, const Edge& e) const {
    return e.capacity > 0 && reduced_cost(from, e) <= kAdmissibleSlack;
  }

  std::int64_t blocking_flow(std::uint32_t source, std::uint32_t sink, std::int64_t limit) {
    std::int64_t total = 0;
    level_.assign(adj_.size(), -1);
    cursor_.assign(adj_.size(), 0);
    while (total < limit && build_levels(source, sink)) {
      std::fill(cursor_.begin(), cursor_.end(), 0);
      while (total < limit) {
        const std::int64_t pushed = augment(source, sink, limit - total);
        if (pushed == 0) break;
        total += pushed;
      }
    }
    return total;
  }

  bool build_levels(std::uint32_t source, std::uint32_t sink) {
    std::fill(level_.begin(), level_.end(), -1);
    std::vector<std::uint32_t> queue{source};
    level_[source] = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const std::uint32_t u = queue[head];
      for (std::uint32_t id : adj_[u]) {
        const Edge& e = edges_[id];
        if (level_[e.to] < 0 && admissible(u, e)) {
          level_[e.to] = level_[u] + 1;
          queue.push_back(e.to);
        }
      }
    }
    return level_[sink] >= 0;
  }

  std::int64_t augment(std::uint32_t u, std::uint32_t sink, std::int64_t limit) {
    if (u == sink) return limit;
    for (auto& i = cursor_[u]; i < adj_[u].size(); ++i) {
      const std::uint32_t id = adj_[u][i];
      Edge& e = edges_[id];
      if (level_[e.to] != level_[u] + 1 || !admissible(u, e)) continue;
      const std::int64_t pushed = augment(e.to, sink, std::min(limit, e.capacity));
      if (pushed > 0) {
        e.capacity -= pushed;
        edges_[id ^ 1].capacity += pushed;
        return pushed;
      }
    }
    return 0;
  }

  std::vector<std::vector<std::uint32_t>> adj_;
  std::vector<Edge> edges_;
  std::vector<double> potential_;
  std::vector<int> level_;
  std::vector<std::size_t> cursor_;
};

}  // namespace

std::vector<IntegerFlow> solve_transport(std::span<const std::int64_t> supply,
                                         std::span<const std::int64_t> demand,
                                         std::span<const double> cost, double saturation) {
  const std::size_t n = supply.size();
  const std::size_t m = demand.size();
  if (cost.size() != n * m) throw Error("cost matrix does not match supply x demand");
  for (std::int64_t s : supply) {
    if (s < 0) throw Error("supplies must be non-negative");
  }
  for (std::int64_t d : demand) {
    if (d < 0) throw Error("demands must be non-negative");
  }
  const std::int64_t total = std::accumulate(supply.begin(), supply.end(), std::int64_t{0});
  if (total != std::accumulate(demand.begin(), demand.end(), std::int64_t{0})) {
    throw Error("transport problem is unbalanced");
  }
  if (total == 0) return {};

  // Nodes: super source, sources, sinks, transshipment hub, super sink.
  const auto src = [](std::size_t i) { return static_cast<std::uint32_t>(1 + i); };
  const auto dst = [n](std::size_t j) { return static_cast<std::uint32_t>(1 + n + j); };
  const auto hub = static_cast<std::uint32_t>(1 + n + m);
  const auto super_sink = static_cast<std::uint32_t>(2 + n + m);
  const bool use_hub = std::isfinite(saturation);

  FlowNetwork net(3 + n + m);
  for (std::size_t i = 0; i < n; ++i) net.add_edge(0, src(i), supply[i], 0.0);
  for (std::size_t j = 0; j < m; ++j) net.add_edge(dst(j), super_sink, demand[j], 0.0);

  struct DirectEdge {
    std::uint32_t source;
    std::uint32_t target;
    std::size_t id;
  };
  std::vector<DirectEdge> direct;
  for (std::size_t i = 0; i < n; ++i) {
    if (supply[i] == 0) continue;
    for (std::size_t j = 0; j < m; ++j) {
      if (demand[j] == 0) continue;
      const double c = cost[i * m + j];
      if (!(c >= 0.0) || !std::isfinite(c)) throw Error("transport costs must be finite and non-negative");
      if (use_hub && c >= saturation) continue;
      direct.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j),
                        net.add_edge(src(i), dst(j), total, c)});
    }
  }
  std::vector<std::size_t> into_hub(n, 0);
  std::vector<std::size_t> out_of_hub(m, 0);
  if (use_hub) {
    for (std::size_t i = 0; i < n; ++i) into_hub[i] = net.add_edge(src(i), hub, supply[i], saturation);
    for (std::size_t j = 0; j < m; ++j) out_of_hub[j] = net.add_edge(hub, dst(j), demand[j], 0.0);
  }

  net.run(0, super_sink, total);

  std::vector<IntegerFlow> flows;
  for (const auto& e : direct) {
    if (const std::int64_t f = net.flow_on(e.id); f > 0) flows.push_back({e.source, e.target, f});
  }
  if (use_hub) {
    // Pair hub inflows with hub outflows in index order. At the optimum every such pair is
    // saturated, otherwise the direct edge would have been cheaper.
    std::size_t j = 0;
    std::int64_t out_left = m > 0 ? net.flow_on(out_of_hub[0]) : 0;
    for (std::size_t i = 0; i < n; ++i) {
      std::int64_t in_left = net.flow_on(into_hub[i]);
      while (in_left > 0) {
        while (out_left == 0) out_left = net.flow_on(out_of_hub[++j]);
        const std::int64_t f = std::min(in_left, out_left);
        flows.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), f});
        in_left -= f;
        out_left -= f;
      }
    }
  }
  std::sort(flows.begin(), flows.end(), [](const IntegerFlow& a, const IntegerFlow& b) {
    return a.source != b.source ? a.source < b.source : a.target < b.target;
  });
  // A pair can appear twice (direct and through the hub) only with equal cost; merge them.
  std::vector<IntegerFlow> merged;
  for (const auto& f : flows) {
    if (!merged.empty() && merged.back().source == f.source && merged.back().target == f.target) {
      merged.back().amount += f.amount;
    } else {
      merged.push_back(f);
    }
  }
  return merged;
}

}  // namespace palette_forge
