#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "subdiff/graph.hpp"

namespace subdiff {

/// Mean over pairs in `edit_set` of the fraction of samples whose state at
/// the pair agrees with `target` (present for missing edges, absent for added ones).
double consensus(const std::vector<Graph>& samples, const EdgeList& edit_set, const Graph& target);

struct Diversity {
  double diversity{0.0};          ///< fraction of ordered sample pairs with different edge sets
  double distinct_fraction{0.0};  ///< distinct edge sets / R
};
Diversity diversity(const std::vector<Graph>& samples);

/// Mean |E_G| / |E_T|.
double sparsity(const std::vector<Graph>& samples, const Graph& target);

/// Mean |E_G ∩ E_O| / |E_O|; with `aligned`, both graphs are first relabelled
/// by descending degree (ties by id).
double edge_overlap(const std::vector<Graph>& samples, const Graph& observed, bool aligned = false);

/// Mean |E_G ∩ E_O| / |E_T|, reported next to edge_overlap for comparison.
double edge_overlap_target_norm(const std::vector<Graph>& samples, const Graph& observed, const Graph& target);

struct MetricReport {
  std::string task;
  int R{0};
  std::optional<double> consensus;  ///< absent when the edit set is empty
  double diversity{0.0};
  double distinct_fraction{0.0};
  double sparsity{0.0};
  double edge_overlap{0.0};
  double edge_overlap_target_norm{0.0};
  bool sparsity_in_range{true};
  std::size_t edit_set_size{0};

  nlohmann::json to_json() const;
};

/// All metrics for one set of samples. Diversity needs R >= 2 and is left at 0 otherwise.
MetricReport evaluate(const std::string& task, const std::vector<Graph>& samples, const Graph& observed,
                      const Graph& target, const EdgeList& edit_set, bool aligned = false);

}  // namespace subdiff
