#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "subdiff/graph.hpp"

namespace subdiff {

/// Per-node global context: the d smallest-nonzero Laplacian eigenvectors,
/// plus a tie-break column when two rows agree to 1e-12. Rows are pairwise
/// distinct.
Eigen::MatrixXd global_context(const Graph& g, int d = 2);

/// Columns of the local-context matrix.
enum LocalFeature : int {
  kDegree = 0,
  kTriangles,
  kFourCycles,
  kFiveCycles,
  kClustering,
  kSizeRatio,
  kDensity,
  kLocalFeatureCount
};

/// Structural features of a (possibly noisy, possibly disconnected) state.
/// Counts are normalized by their complete-graph maximum so every entry lies in [0, 1].
Eigen::MatrixXd local_context(const Eigen::MatrixXd& adjacency, std::size_t n_max);
Eigen::MatrixXd local_context(const Graph& g, std::size_t n_max);

/// Raw per-node cycle participation counts (lengths 3, 4, 5) from matrix powers.
struct CycleCounts {
  Eigen::VectorXd triangles;
  Eigen::VectorXd four;
  Eigen::VectorXd five;
};
CycleCounts cycle_counts(const Eigen::MatrixXd& adjacency);

struct Subgraph {
  std::vector<NodeId> parent_ids;  ///< ascending original ids
  std::size_t center{0};           ///< local index of the ego center
  Graph graph;                     ///< local adjacency (and labels)
  Eigen::MatrixXd context;         ///< parent's context rows for parent_ids

  std::size_t size() const noexcept { return parent_ids.size(); }
};

/// Induced subgraph with the parent's context rows. `center` is a parent id in `nodes`.
Subgraph make_subgraph(const Graph& g, const Eigen::MatrixXd& context, std::vector<NodeId> nodes,
                       NodeId center);

/// One induced k-hop ego network per node.
std::vector<Subgraph> sample_ego_networks(const Graph& g, const Eigen::MatrixXd& context, int hops);

/// Shrinks `s` to at most n_max nodes: the center plus n_max - 1 uniformly
/// drawn nodes, induced, then the component containing the center. Redraws up
/// to 20 times if fewer than 2 nodes survive, then falls back to the center's
/// 1-hop neighbourhood truncated to n_max.
Subgraph subsample(const Subgraph& s, std::size_t n_max, std::uint64_t seed);

/// subsample() over a collection with one RNG stream per ego center.
std::vector<Subgraph> subsample_all(const std::vector<Subgraph>& subgraphs, std::size_t n_max,
                                    std::uint64_t seed);

using ContextRow = std::vector<double>;

struct Histograms {
  struct GlobalEntry {
    std::size_t count{0};
    NodeId node{0};  ///< original node carrying this row
  };
  std::map<ContextRow, GlobalEntry> global;
  std::map<std::size_t, std::size_t> size;

  std::size_t total_subgraphs() const;
};

Histograms build_histograms(const std::vector<Subgraph>& subgraphs);

ContextRow context_row(const Eigen::MatrixXd& context, Eigen::Index row);

}  // namespace subdiff
