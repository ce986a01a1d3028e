#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace subdiff {

using NodeId = std::uint32_t;

/// Unordered node pair, stored with u < v.
struct Edge {
  NodeId u{0};
  NodeId v{0};

  Edge() = default;
  Edge(NodeId a, NodeId b) : u(a < b ? a : b), v(a < b ? b : a) {}

  auto operator<=>(const Edge&) const = default;
};

using EdgeList = std::vector<Edge>;

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DisconnectedGraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sorts and deduplicates, dropping self-loops. Result is a canonical edge set.
EdgeList canonical_edges(EdgeList edges);

EdgeList edge_difference(const EdgeList& a, const EdgeList& b);
EdgeList edge_intersection(const EdgeList& a, const EdgeList& b);
EdgeList edge_union(const EdgeList& a, const EdgeList& b);

/// Undirected simple graph in CSR form. Node labels are optional categorical
/// values in [0, num_classes); an empty label vector means "unlabelled".
class Graph {
 public:
  Graph() = default;
  explicit Graph(std::size_t n) : offsets_(n + 1, 0) {}
  Graph(std::size_t n, EdgeList edges);

  std::size_t num_nodes() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t num_edges() const noexcept { return edges_.size(); }
  std::size_t adjacency_nonzeros() const noexcept { return 2 * edges_.size(); }

  std::span<const NodeId> neighbors(NodeId v) const {
    return {adjacency_.data() + offsets_[v], adjacency_.data() + offsets_[v + 1]};
  }
  std::size_t degree(NodeId v) const { return offsets_[v + 1] - offsets_[v]; }
  bool has_edge(NodeId a, NodeId b) const;

  /// Canonical (sorted, u < v) edge list.
  const EdgeList& edges() const noexcept { return edges_; }
  std::vector<std::size_t> degrees() const;

  Eigen::MatrixXd adjacency_matrix() const;

  bool has_labels() const noexcept { return !labels_.empty(); }
  const std::vector<int>& labels() const noexcept { return labels_; }
  int num_classes() const noexcept { return num_classes_; }
  void set_labels(std::vector<int> labels, int num_classes);

 private:
  std::vector<std::size_t> offsets_;
  std::vector<NodeId> adjacency_;
  EdgeList edges_;
  std::vector<int> labels_;
  int num_classes_{0};
};

/// Graph built from a dense 0/1 symmetric matrix (entries > 0.5 are edges).
Graph graph_from_adjacency(const Eigen::MatrixXd& adjacency);

Graph load_edge_list(const std::filesystem::path& path);
void write_edge_list(const std::filesystem::path& path, const EdgeList& edges,
                     const std::string& header = {});
EdgeList load_edges(const std::filesystem::path& path);

/// Reads "node_id,label" CSV (header optional) and attaches labels to `g`.
void load_labels(const std::filesystem::path& path, Graph& g);

/// Breadth-first distances from `source`; unreachable nodes get -1.
std::vector<int> bfs_distances(const Graph& g, NodeId source, int max_depth = -1);
bool is_connected(const Graph& g);
/// Component id per node; components numbered by smallest contained node id.
std::vector<int> connected_components(const Graph& g);

/// Subgraph induced on `nodes`; node i of the result is nodes[i]. Labels carried over.
Graph induced_subgraph(const Graph& g, std::span<const NodeId> nodes);

struct ComponentResult {
  Graph graph;
  std::vector<NodeId> original_ids;  ///< original_ids[new id] = old id, ascending
};

/// Largest component; ties broken by the smallest contained original id.
ComponentResult largest_connected_component(const Graph& g);

/// Nodes within `hops` of `center`, ascending.
std::vector<NodeId> ego_nodes(const Graph& g, NodeId center, int hops);

}  // namespace subdiff
