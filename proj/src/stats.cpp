#include "subdiff/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace subdiff {

std::vector<std::uint64_t> count_triangles_per_node(const Graph& g) {
  std::vector<std::uint64_t> count(g.num_nodes(), 0);
  // Each triangle u < v < w is found once from its smallest edge (u, v).
  for (const auto& e : g.edges()) {
    auto a = g.neighbors(e.u);
    auto b = g.neighbors(e.v);
    auto ia = std::upper_bound(a.begin(), a.end(), e.v);
    auto ib = std::upper_bound(b.begin(), b.end(), e.v);
    while (ia != a.end() && ib != b.end()) {
      if (*ia < *ib) {
        ++ia;
      } else if (*ib < *ia) {
        ++ib;
      } else {
        ++count[e.u];
        ++count[e.v];
        ++count[*ia];
        ++ia;
        ++ib;
      }
    }
  }
  return count;
}

std::uint64_t count_triangles(const Graph& g) {
  auto per_node = count_triangles_per_node(g);
  return std::accumulate(per_node.begin(), per_node.end(), std::uint64_t{0}) / 3;
}

double transitivity(const Graph& g) {
  double wedges = 0.0;
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    const double d = static_cast<double>(g.degree(v));
    wedges += d * (d - 1.0) / 2.0;
  }
  if (wedges == 0.0) return 0.0;
  return 3.0 * static_cast<double>(count_triangles(g)) / wedges;
}

double degree_assortativity(const Graph& g) {
  if (g.num_edges() == 0) return 0.0;
  double sx = 0.0;
  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& e : g.edges()) {
    const double du = static_cast<double>(g.degree(e.u));
    const double dv = static_cast<double>(g.degree(e.v));
    sx += du + dv;
    sxx += du * du + dv * dv;
    sxy += 2.0 * du * dv;
  }
  const double m = 2.0 * static_cast<double>(g.num_edges());
  const double mean = sx / m;
  const double var = sxx / m - mean * mean;
  if (var <= 1e-14 * std::max(1.0, sxx / m)) return 0.0;
  return (sxy / m - mean * mean) / var;
}

double characteristic_path_length(const Graph& g) {
  const std::size_t n = g.num_nodes();
  if (n < 2) throw std::invalid_argument("characteristic_path_length: need at least 2 nodes");
  std::uint64_t total = 0;
  std::vector<int> dist(n);
  std::vector<NodeId> queue(n);
  for (NodeId s = 0; s < n; ++s) {
    std::fill(dist.begin(), dist.end(), -1);
    dist[s] = 0;
    std::size_t head = 0;
    std::size_t tail = 0;
    queue[tail++] = s;
    while (head < tail) {
      NodeId u = queue[head++];
      for (NodeId w : g.neighbors(u)) {
        if (dist[w] < 0) {
          dist[w] = dist[u] + 1;
          queue[tail++] = w;
          if (w > s) total += static_cast<std::uint64_t>(dist[w]);
        }
      }
    }
    if (tail != n) throw DisconnectedGraphError("characteristic_path_length: graph is disconnected");
  }
  return static_cast<double>(total) / (static_cast<double>(n) * static_cast<double>(n - 1) / 2.0);
}

double power_law_exponent(const Graph& g) {
  double log_sum = 0.0;
  std::size_t count = 0;
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    const auto d = g.degree(v);
    if (d == 0) continue;
    log_sum += std::log(static_cast<double>(d) / 0.5);
    ++count;
  }
  if (count == 0) throw std::invalid_argument("power_law_exponent: graph has no edges");
  return 1.0 + static_cast<double>(count) / log_sum;
}

std::vector<NodeId> degree_alignment(const Graph& g) {
  std::vector<NodeId> order(g.num_nodes());
  std::iota(order.begin(), order.end(), NodeId{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](NodeId a, NodeId b) { return g.degree(a) > g.degree(b); });
  std::vector<NodeId> rank(g.num_nodes());
  for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = static_cast<NodeId>(i);
  return rank;
}

double aligned_edge_overlap_pct(const Graph& g, const Graph& reference) {
  if (reference.num_edges() == 0) throw std::invalid_argument("aligned_edge_overlap_pct: empty reference");
  auto rank_g = degree_alignment(g);
  auto rank_r = degree_alignment(reference);
  std::vector<NodeId> by_rank_g(g.num_nodes());
  for (NodeId v = 0; v < g.num_nodes(); ++v) by_rank_g[rank_g[v]] = v;
  std::size_t hits = 0;
  for (const auto& e : reference.edges()) {
    const NodeId a = rank_r[e.u];
    const NodeId b = rank_r[e.v];
    if (a < g.num_nodes() && b < g.num_nodes() && g.has_edge(by_rank_g[a], by_rank_g[b])) ++hits;
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(reference.num_edges());
}

GraphStats graph_stats(const Graph& g, const Graph* reference) {
  if (g.num_nodes() < 3) throw std::invalid_argument("graph_stats: need at least 3 nodes");
  bool has_wedge = false;
  for (NodeId v = 0; v < g.num_nodes() && !has_wedge; ++v) has_wedge = g.degree(v) >= 2;
  if (!has_wedge) throw std::invalid_argument("graph_stats: graph has no path of length 2");

  GraphStats s;
  s.triangle_count = count_triangles(g);
  s.transitivity = transitivity(g);
  s.char_path_length = characteristic_path_length(g);
  s.assortativity = degree_assortativity(g);
  s.power_law_exp = power_law_exponent(g);
  if (reference != nullptr) s.edge_overlap_pct = aligned_edge_overlap_pct(g, *reference);
  return s;
}

}  // namespace subdiff
