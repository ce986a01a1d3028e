#include "subdiff/metrics.hpp"

#include <set>
#include <stdexcept>

#include "subdiff/stats.hpp"

namespace subdiff {

double consensus(const std::vector<Graph>& samples, const EdgeList& edit_set, const Graph& target) {
  if (edit_set.empty()) throw std::invalid_argument("consensus: empty edit set");
  if (samples.empty()) throw std::invalid_argument("consensus: no samples");
  const double r = static_cast<double>(samples.size());
  double total = 0.0;
  for (const auto& e : edit_set) {
    const bool want = target.has_edge(e.u, e.v);
    double agree = 0.0;
    for (const auto& s : samples) agree += s.has_edge(e.u, e.v) == want ? 1.0 : 0.0;
    total += agree / r;
  }
  return total / static_cast<double>(edit_set.size());
}

Diversity diversity(const std::vector<Graph>& samples) {
  const std::size_t r = samples.size();
  if (r < 2) throw std::invalid_argument("diversity: need at least 2 samples");
  std::size_t unequal = 0;
  for (std::size_t a = 0; a < r; ++a) {
    for (std::size_t b = 0; b < r; ++b) {
      if (a != b && samples[a].edges() != samples[b].edges()) ++unequal;
    }
  }
  std::set<EdgeList> distinct;
  for (const auto& s : samples) distinct.insert(s.edges());
  Diversity d;
  d.diversity = static_cast<double>(unequal) / static_cast<double>(r * (r - 1));
  d.distinct_fraction = static_cast<double>(distinct.size()) / static_cast<double>(r);
  return d;
}

double sparsity(const std::vector<Graph>& samples, const Graph& target) {
  if (target.num_edges() == 0) throw std::invalid_argument("sparsity: target has no edges");
  if (samples.empty()) throw std::invalid_argument("sparsity: no samples");
  double total = 0.0;
  for (const auto& s : samples) total += static_cast<double>(s.num_edges()) / static_cast<double>(target.num_edges());
  return total / static_cast<double>(samples.size());
}

namespace {

EdgeList relabel(const Graph& g) {
  const auto rank = degree_alignment(g);
  EdgeList out;
  out.reserve(g.num_edges());
  for (const auto& e : g.edges()) out.emplace_back(rank[e.u], rank[e.v]);
  return canonical_edges(std::move(out));
}

std::size_t overlap_count(const Graph& sample, const Graph& observed, bool aligned) {
  if (aligned) return edge_intersection(relabel(sample), relabel(observed)).size();
  return edge_intersection(sample.edges(), observed.edges()).size();
}

}  // namespace

double edge_overlap(const std::vector<Graph>& samples, const Graph& observed, bool aligned) {
  if (observed.num_edges() == 0) throw std::invalid_argument("edge_overlap: observed graph has no edges");
  if (samples.empty()) throw std::invalid_argument("edge_overlap: no samples");
  double total = 0.0;
  for (const auto& s : samples) {
    total += static_cast<double>(overlap_count(s, observed, aligned)) / static_cast<double>(observed.num_edges());
  }
  return total / static_cast<double>(samples.size());
}

double edge_overlap_target_norm(const std::vector<Graph>& samples, const Graph& observed, const Graph& target) {
  if (target.num_edges() == 0) throw std::invalid_argument("edge_overlap: target has no edges");
  double total = 0.0;
  for (const auto& s : samples) {
    total += static_cast<double>(overlap_count(s, observed, false)) / static_cast<double>(target.num_edges());
  }
  return total / static_cast<double>(samples.size());
}

nlohmann::json MetricReport::to_json() const {
  nlohmann::json j{
      {"task", task},
      {"R", R},
      {"consensus", consensus ? nlohmann::json(*consensus) : nlohmann::json(nullptr)},
      {"diversity", diversity},
      {"distinct_fraction", distinct_fraction},
      {"sparsity", sparsity},
      {"sparsity_in_range", sparsity_in_range},
      {"edge_overlap", edge_overlap},
      {"edge_overlap_target_norm", edge_overlap_target_norm},
      {"edit_set_size", edit_set_size},
  };
  return j;
}

MetricReport evaluate(const std::string& task, const std::vector<Graph>& samples, const Graph& observed,
                      const Graph& target, const EdgeList& edit_set, bool aligned) {
  MetricReport m;
  m.task = task;
  m.R = static_cast<int>(samples.size());
  m.edit_set_size = edit_set.size();
  if (!edit_set.empty()) m.consensus = consensus(samples, edit_set, target);
  if (samples.size() >= 2) {
    const auto d = diversity(samples);
    m.diversity = d.diversity;
    m.distinct_fraction = d.distinct_fraction;
  }
  m.sparsity = sparsity(samples, target);
  m.edge_overlap = edge_overlap(samples, observed, aligned);
  m.edge_overlap_target_norm = edge_overlap_target_norm(samples, observed, target);
  const double lo = static_cast<double>(observed.num_edges()) / static_cast<double>(target.num_edges());
  const double v = static_cast<double>(observed.num_nodes());
  const double hi = v * v / static_cast<double>(target.num_edges());
  m.sparsity_in_range = m.sparsity >= lo - 1e-12 && m.sparsity <= hi + 1e-12;
  return m;
}

}  // namespace subdiff
