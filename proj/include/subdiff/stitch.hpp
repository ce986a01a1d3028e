#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "subdiff/diffusion.hpp"

namespace subdiff {

/// A subgraph whose nodes are identified by global-context rows.
struct Piece {
  Graph graph;
  std::vector<ContextRow> rows;  ///< rows[i] identifies local node i
};

Piece piece_from_subgraph(const Subgraph& s);

struct Coalesced {
  Graph graph;
  std::vector<ContextRow> rows;  ///< canonical row of each output node, ascending
};

/// Identifies nodes across pieces by equal context rows (max-abs distance <=
/// epsilon when epsilon > 0) and unions their edges. Output nodes are ordered
/// by their canonical row. Throws when a row matches two distinct canonical
/// rows, or when one piece maps two of its nodes to the same row.
Coalesced coalesce(const std::vector<Piece>& pieces, double epsilon = 0.0);

struct StitchOptions {
  std::uint64_t seed{0};
  double uncovered_weight{10.0};
  double epsilon_match{0.0};
  /// 0 means 50 * (number of histogram rows).
  std::size_t max_iterations{0};
};

struct StitchResult {
  Graph graph;
  std::vector<ContextRow> rows;
  std::vector<NodeId> source_nodes;  ///< training node that carried each row
  std::size_t iterations{0};
};

/// Called once per generated piece with (iteration, piece).
using PieceObserver = std::function<void(std::size_t, const Piece&)>;

/// Samples subgraphs until every histogram row has been used, then coalesces.
StitchResult generate_large(const DiffusionModel& model, const StitchOptions& options,
                            const PieceObserver& observe = {});

}  // namespace subdiff
