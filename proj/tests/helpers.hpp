#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <vector>

#include "subdiff/graph.hpp"
#include "subdiff/rng.hpp"

namespace testing {

using subdiff::Edge;
using subdiff::EdgeList;
using subdiff::Graph;
using subdiff::NodeId;

inline Graph path_graph(std::size_t n) {
  EdgeList e;
  for (NodeId i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return Graph(n, e);
}

inline Graph cycle_graph(std::size_t n) {
  EdgeList e;
  for (NodeId i = 0; i < n; ++i) e.emplace_back(i, static_cast<NodeId>((i + 1) % n));
  return Graph(n, e);
}

inline Graph complete_graph(std::size_t n) {
  EdgeList e;
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j = i + 1; j < n; ++j) e.emplace_back(i, j);
  }
  return Graph(n, e);
}

/// Node 0 is the center.
inline Graph star_graph(std::size_t leaves) {
  EdgeList e;
  for (NodeId i = 1; i <= leaves; ++i) e.emplace_back(0, i);
  return Graph(leaves + 1, e);
}

inline Graph gnp(std::size_t n, double p, std::uint64_t seed) {
  auto rng = subdiff::make_rng(seed, 99);
  EdgeList e;
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j = i + 1; j < n; ++j) {
      if (subdiff::uniform01(rng) < p) e.emplace_back(i, j);
    }
  }
  return Graph(n, e);
}

/// The BA-Shapes house: 0-1-2-3 square, apex 4 on 0 and 1.
inline Graph house_graph() { return Graph(5, {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {0, 4}, {1, 4}}); }

/// Brute-force isomorphism for tiny graphs.
inline bool isomorphic(const Graph& a, const Graph& b) {
  if (a.num_nodes() != b.num_nodes() || a.num_edges() != b.num_edges()) return false;
  std::vector<NodeId> perm(a.num_nodes());
  std::iota(perm.begin(), perm.end(), 0);
  do {
    bool ok = true;
    for (const auto& e : a.edges()) {
      if (!b.has_edge(perm[e.u], perm[e.v])) {
        ok = false;
        break;
      }
    }
    if (ok) return true;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return false;
}

/// Simple cycles of length `len` through node v, by exhaustive path enumeration.
inline std::vector<double> brute_cycles(const Graph& g, int len) {
  const std::size_t n = g.num_nodes();
  std::vector<double> per_node(n, 0.0);
  std::vector<NodeId> path;
  std::vector<char> used(n, 0);
  // Enumerate each cycle once: start at its smallest node, fix direction by second < last.
  auto rec = [&](auto&& self, NodeId start) -> void {
    if (static_cast<int>(path.size()) == len) {
      if (g.has_edge(path.back(), start) && path[1] < path.back()) {
        for (NodeId v : path) per_node[v] += 1.0;
      }
      return;
    }
    for (NodeId w : g.neighbors(path.back())) {
      if (w <= start || used[w]) continue;
      used[w] = 1;
      path.push_back(w);
      self(self, start);
      path.pop_back();
      used[w] = 0;
    }
  };
  for (NodeId s = 0; s < n; ++s) {
    path = {s};
    used.assign(n, 0);
    used[s] = 1;
    rec(rec, s);
  }
  return per_node;
}

inline std::filesystem::path data_dir() { return SUBDIFF_TEST_DATA_DIR; }

/// Fresh empty scratch directory under the build tree.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::path(SUBDIFF_TEST_SCRATCH_DIR) / name;
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace testing
