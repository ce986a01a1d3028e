#include "subdiff/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "subdiff/rng.hpp"

namespace subdiff {

Graph barabasi_albert(std::size_t n, std::size_t m, std::uint64_t seed) {
  if (m < 1 || n <= m) throw std::invalid_argument("barabasi_albert: need n > m >= 1");
  Rng rng = make_rng(seed, 0xBA);
  EdgeList edges;
  edges.reserve(m * (n - m));
  std::vector<NodeId> repeated;
  std::vector<NodeId> targets(m);
  for (std::size_t i = 0; i < m; ++i) targets[i] = static_cast<NodeId>(i);
  for (std::size_t source = m; source < n; ++source) {
    for (NodeId t : targets) edges.emplace_back(static_cast<NodeId>(source), t);
    repeated.insert(repeated.end(), targets.begin(), targets.end());
    repeated.insert(repeated.end(), m, static_cast<NodeId>(source));
    std::set<NodeId> chosen;
    while (chosen.size() < m) {
      std::uniform_int_distribution<std::size_t> pick(0, repeated.size() - 1);
      chosen.insert(repeated[pick(rng)]);
    }
    targets.assign(chosen.begin(), chosen.end());
  }
  return Graph(n, std::move(edges));
}

BaShapes generate_ba_shapes(const BaShapesParams& p) {
  if (p.m < 1 || p.n_base <= p.m) throw std::invalid_argument("generate_ba_shapes: need n_base > m >= 1");
  if (p.random_edge_frac < 0.0 || p.random_edge_frac >= 1.0) {
    throw std::invalid_argument("generate_ba_shapes: random_edge_frac must be in [0, 1)");
  }
  Graph base = barabasi_albert(p.n_base, p.m, p.seed);
  Rng rng = make_rng(p.seed, 0x5EA);
  const std::size_t n = p.n_base + 5 * p.n_motifs;
  EdgeList edges = base.edges();
  BaShapes out;
  std::vector<int> labels(n, 0);
  std::uniform_int_distribution<NodeId> pick_base(0, static_cast<NodeId>(p.n_base - 1));
  for (std::size_t h = 0; h < p.n_motifs; ++h) {
    House house;
    for (NodeId i = 0; i < 5; ++i) house[i] = static_cast<NodeId>(p.n_base + 5 * h + i);
    const EdgeList body = {{house[0], house[1]}, {house[1], house[2]}, {house[2], house[3]}, {house[3], house[0]}};
    const EdgeList roof = {{house[0], house[4]}, {house[1], house[4]}};
    for (const auto& e : body) out.motif_edges.push_back(e);
    for (const auto& e : roof) {
      out.motif_edges.push_back(e);
      out.roof_edges.push_back(e);
    }
    edges.insert(edges.end(), body.begin(), body.end());
    edges.insert(edges.end(), roof.begin(), roof.end());
    edges.emplace_back(house[3], pick_base(rng));
    labels[house[0]] = labels[house[1]] = 1;
    labels[house[2]] = labels[house[3]] = 2;
    labels[house[4]] = 3;
    out.houses.push_back(house);
  }
  edges = canonical_edges(std::move(edges));
  const auto extra = static_cast<std::size_t>(std::floor(p.random_edge_frac * static_cast<double>(edges.size())));
  if (extra > 0) {
    std::set<Edge> present(edges.begin(), edges.end());
    std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(n - 1));
    std::size_t added = 0;
    while (added < extra) {
      NodeId a = pick(rng);
      NodeId b = pick(rng);
      if (a == b) continue;
      if (present.insert(Edge(a, b)).second) {
        edges.emplace_back(a, b);
        ++added;
      }
    }
  }
  out.graph = Graph(n, std::move(edges));
  out.graph.set_labels(std::move(labels), 4);
  std::sort(out.motif_edges.begin(), out.motif_edges.end());
  std::sort(out.roof_edges.begin(), out.roof_edges.end());
  return out;
}

CorruptionMode parse_corruption_mode(const std::string& name) {
  if (name == "remove") return CorruptionMode::remove;
  if (name == "add") return CorruptionMode::add;
  if (name == "motif") return CorruptionMode::motif;
  throw std::invalid_argument("unknown corruption mode '" + name + "' (expected remove|add|motif)");
}

std::string to_string(CorruptionMode mode) {
  switch (mode) {
    case CorruptionMode::remove: return "remove";
    case CorruptionMode::add: return "add";
    case CorruptionMode::motif: return "motif";
  }
  return "?";
}

namespace {

/// Mutable adjacency used while deleting edges.
class EditableGraph {
 public:
  explicit EditableGraph(const Graph& g) : adj_(g.num_nodes()) {
    for (const auto& e : g.edges()) {
      adj_[e.u].insert(e.v);
      adj_[e.v].insert(e.u);
    }
  }

  void remove(const Edge& e) {
    adj_[e.u].erase(e.v);
    adj_[e.v].erase(e.u);
  }

  /// True if u and v stay connected once edge (u, v) is gone.
  bool connected_without(const Edge& e) {
    std::vector<char> seen(adj_.size(), 0);
    std::vector<NodeId> stack{e.u};
    seen[e.u] = 1;
    while (!stack.empty()) {
      NodeId x = stack.back();
      stack.pop_back();
      for (NodeId y : adj_[x]) {
        if (x == e.u && y == e.v) continue;
        if (x == e.v && y == e.u) continue;
        if (y == e.v) return true;
        if (!seen[y]) {
          seen[y] = 1;
          stack.push_back(y);
        }
      }
    }
    return false;
  }

 private:
  std::vector<std::set<NodeId>> adj_;
};

EdgeList remove_connected(const Graph& g, EdgeList pool, std::size_t count, Rng& rng) {
  EditableGraph work(g);
  EdgeList removed;
  const std::size_t max_rejections = 100 * std::max<std::size_t>(g.num_edges(), 1);
  std::size_t rejections = 0;
  while (removed.size() < count) {
    if (pool.empty() || rejections >= max_rejections) {
      throw CorruptionError("corrupt: only " + std::to_string(removed.size()) + " of " +
                                std::to_string(count) + " deletions possible without disconnecting the graph",
                            removed.size());
    }
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    const std::size_t idx = pick(rng);
    const Edge e = pool[idx];
    pool[idx] = pool.back();
    pool.pop_back();
    // A bridge stays a bridge as more edges disappear, so rejected edges leave the pool.
    if (!work.connected_without(e)) {
      ++rejections;
      continue;
    }
    work.remove(e);
    removed.push_back(e);
  }
  std::sort(removed.begin(), removed.end());
  return removed;
}

}  // namespace

EdgeList motif_non_edges(const BaShapes& shapes) {
  EdgeList out;
  for (const auto& h : shapes.houses) {
    for (std::size_t a = 0; a < h.size(); ++a) {
      for (std::size_t b = a + 1; b < h.size(); ++b) {
        if (!shapes.graph.has_edge(h[a], h[b])) out.emplace_back(h[a], h[b]);
      }
    }
  }
  return canonical_edges(std::move(out));
}

CorruptionResult apply_edits(const Graph& target, const EdgeList& remove, const EdgeList& add) {
  CorruptionResult out;
  out.target = target;
  EdgeList rm = canonical_edges(remove);
  EdgeList ad = canonical_edges(add);
  out.missing_edges = edge_intersection(target.edges(), rm);
  out.added_edges = edge_difference(ad, target.edges());
  EdgeList observed = edge_union(edge_difference(target.edges(), out.missing_edges), out.added_edges);
  out.observed = Graph(target.num_nodes(), std::move(observed));
  if (target.has_labels()) out.observed.set_labels(target.labels(), target.num_classes());
  return out;
}

CorruptionResult corrupt(const Graph& g, const CorruptionSpec& spec, const EdgeList& motif_edges,
                         const EdgeList& add_pool) {
  if (!(spec.frac > 0.0 && spec.frac <= 0.5)) throw std::invalid_argument("corrupt: frac must be in (0, 0.5]");
  if (!is_connected(g)) throw DisconnectedGraphError("corrupt: input graph must be connected");
  Rng rng = make_rng(spec.seed, 0xC0);
  switch (spec.mode) {
    case CorruptionMode::remove: {
      const auto count = static_cast<std::size_t>(std::floor(spec.frac * static_cast<double>(g.num_edges())));
      return apply_edits(g, remove_connected(g, g.edges(), count, rng), {});
    }
    case CorruptionMode::motif: {
      if (motif_edges.empty()) throw std::invalid_argument("corrupt: motif mode needs motif edges");
      EdgeList pool = edge_intersection(canonical_edges(motif_edges), g.edges());
      const auto count = static_cast<std::size_t>(std::floor(spec.frac * static_cast<double>(pool.size())));
      return apply_edits(g, remove_connected(g, std::move(pool), count, rng), {});
    }
    case CorruptionMode::add: {
      if (!add_pool.empty()) {
        EdgeList pool = edge_difference(canonical_edges(add_pool), g.edges());
        const auto count = static_cast<std::size_t>(std::floor(spec.frac * static_cast<double>(pool.size())));
        for (std::size_t i = 0; i < count; ++i) {
          std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
          std::swap(pool[i], pool[pick(rng)]);
        }
        pool.resize(count);
        return apply_edits(g, {}, pool);
      }
      const auto count = static_cast<std::size_t>(std::floor(spec.frac * static_cast<double>(g.num_edges())));
      const std::size_t n = g.num_nodes();
      const std::size_t free_pairs = n * (n - 1) / 2 - g.num_edges();
      if (count > free_pairs) throw CorruptionError("corrupt: not enough non-edges to add", 0);
      std::set<Edge> added;
      std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(n - 1));
      while (added.size() < count) {
        NodeId a = pick(rng);
        NodeId b = pick(rng);
        if (a == b || g.has_edge(a, b)) continue;
        added.insert(Edge(a, b));
      }
      return apply_edits(g, {}, EdgeList(added.begin(), added.end()));
    }
  }
  throw std::logic_error("corrupt: unhandled mode");
}

}  // namespace subdiff
