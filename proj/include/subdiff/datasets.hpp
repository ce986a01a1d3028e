#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "subdiff/graph.hpp"

namespace subdiff {

struct BaShapesParams {
  std::size_t n_base{300};
  std::size_t m{5};
  std::size_t n_motifs{80};
  /// Fraction of |E| extra uniformly random edges added after construction.
  double random_edge_frac{0.0};
  std::uint64_t seed{0};
};

/// House motif node order: 0-1-2-3 form the 4-cycle, 4 is the apex joined to
/// 0 and 1, and node 3 carries the single attachment edge to the base graph.
using House = std::array<NodeId, 5>;

struct BaShapes {
  Graph graph;                ///< node labels: 0 base, 1 upper, 2 lower, 3 apex
  EdgeList motif_edges;       ///< the 6 edges of every house
  EdgeList roof_edges;        ///< the 2 apex edges of every house
  std::vector<House> houses;
};

/// Barabasi-Albert graph with m-edge preferential attachment (no repeated
/// targets), starting from m isolated nodes: m * (n_base - m) edges.
Graph barabasi_albert(std::size_t n, std::size_t m, std::uint64_t seed);

BaShapes generate_ba_shapes(const BaShapesParams& params);

enum class CorruptionMode { remove, add, motif };

CorruptionMode parse_corruption_mode(const std::string& name);
std::string to_string(CorruptionMode mode);

struct CorruptionSpec {
  CorruptionMode mode{CorruptionMode::remove};
  double frac{0.1};
  std::uint64_t seed{0};
};

struct CorruptionResult {
  Graph observed;
  Graph target;
  EdgeList missing_edges;  ///< E_T \ E_O
  EdgeList added_edges;    ///< E_O \ E_T
};

class CorruptionError : public std::runtime_error {
 public:
  CorruptionError(const std::string& what, std::size_t succeeded)
      : std::runtime_error(what), succeeded_(succeeded) {}
  std::size_t succeeded() const noexcept { return succeeded_; }

 private:
  std::size_t succeeded_;
};

/// Corrupts a connected graph. `remove` deletes floor(frac*|E|) edges without
/// ever disconnecting the graph, `add` inserts floor(frac*|E|) non-edges, and
/// `motif` deletes floor(frac*|motif_edges|) motif edges under the same
/// connectivity rule (the BA-Shapes protocol uses frac = 0.05). A nonempty
/// `add_pool` restricts `add` to floor(frac*|pool|) non-edges drawn from it.
CorruptionResult corrupt(const Graph& g, const CorruptionSpec& spec, const EdgeList& motif_edges = {},
                         const EdgeList& add_pool = {});

/// The 4 absent pairs inside every house (its chords), for planting spurious motif edges.
EdgeList motif_non_edges(const BaShapes& shapes);

/// Builds a CorruptionResult from explicit edits to `target`.
CorruptionResult apply_edits(const Graph& target, const EdgeList& remove, const EdgeList& add);

}  // namespace subdiff
