#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "subdiff/graph.hpp"

namespace subdiff {

struct GraphStats {
  double power_law_exp{0.0};
  std::uint64_t triangle_count{0};
  double transitivity{0.0};
  double char_path_length{0.0};
  double assortativity{0.0};
  std::optional<double> edge_overlap_pct;
};

/// Number of triangles containing each node.
std::vector<std::uint64_t> count_triangles_per_node(const Graph& g);
std::uint64_t count_triangles(const Graph& g);

/// 3 * triangles / (number of length-2 paths).
double transitivity(const Graph& g);
/// Pearson correlation of endpoint degrees over both edge orientations.
/// Degree-regular graphs have zero variance; 0 is returned for them.
double degree_assortativity(const Graph& g);
/// Mean shortest-path length over unordered pairs; requires a connected graph.
double characteristic_path_length(const Graph& g);
/// Continuous MLE with d_min = 1: 1 + n / sum ln(d / 0.5) over nonzero degrees.
double power_law_exponent(const Graph& g);

/// rank[v] = position of v after sorting by descending degree, ties by id.
std::vector<NodeId> degree_alignment(const Graph& g);

/// Percentage of `reference` edges present in `g` after both are relabelled by
/// degree_alignment().
double aligned_edge_overlap_pct(const Graph& g, const Graph& reference);

GraphStats graph_stats(const Graph& g, const Graph* reference = nullptr);

}  // namespace subdiff
