#include "subdiff/graph.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <queue>
#include <sstream>

#include "subdiff/io.hpp"

namespace subdiff {

EdgeList canonical_edges(EdgeList edges) {
  std::erase_if(edges, [](const Edge& e) { return e.u == e.v; });
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

EdgeList edge_difference(const EdgeList& a, const EdgeList& b) {
  EdgeList out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

EdgeList edge_intersection(const EdgeList& a, const EdgeList& b) {
  EdgeList out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

EdgeList edge_union(const EdgeList& a, const EdgeList& b) {
  EdgeList out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

Graph::Graph(std::size_t n, EdgeList edges) : offsets_(n + 1, 0) {
  edges_ = canonical_edges(std::move(edges));
  for (const auto& e : edges_) {
    if (e.v >= n) {
      throw std::out_of_range("edge (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                              ") exceeds node count " + std::to_string(n));
    }
    ++offsets_[e.u + 1];
    ++offsets_[e.v + 1];
  }
  std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
  adjacency_.resize(2 * edges_.size());
  std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
  for (const auto& e : edges_) adjacency_[cursor[e.v]++] = e.u;
  for (const auto& e : edges_) adjacency_[cursor[e.u]++] = e.v;
  for (std::size_t v = 0; v < n; ++v) {
    std::sort(adjacency_.begin() + static_cast<std::ptrdiff_t>(offsets_[v]),
              adjacency_.begin() + static_cast<std::ptrdiff_t>(offsets_[v + 1]));
  }
}

bool Graph::has_edge(NodeId a, NodeId b) const {
  if (a == b || a >= num_nodes() || b >= num_nodes()) return false;
  if (degree(a) > degree(b)) std::swap(a, b);
  auto nb = neighbors(a);
  return std::binary_search(nb.begin(), nb.end(), b);
}

std::vector<std::size_t> Graph::degrees() const {
  std::vector<std::size_t> d(num_nodes());
  for (std::size_t v = 0; v < d.size(); ++v) d[v] = degree(static_cast<NodeId>(v));
  return d;
}

Eigen::MatrixXd Graph::adjacency_matrix() const {
  const auto n = static_cast<Eigen::Index>(num_nodes());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : edges_) {
    a(e.u, e.v) = 1.0;
    a(e.v, e.u) = 1.0;
  }
  return a;
}

void Graph::set_labels(std::vector<int> labels, int num_classes) {
  if (labels.size() != num_nodes()) {
    throw std::invalid_argument("label count " + std::to_string(labels.size()) +
                                " does not match node count " + std::to_string(num_nodes()));
  }
  for (int l : labels) {
    if (l < 0 || l >= num_classes) throw std::invalid_argument("label out of range");
  }
  labels_ = std::move(labels);
  num_classes_ = num_classes;
}

Graph graph_from_adjacency(const Eigen::MatrixXd& adjacency) {
  const auto n = adjacency.rows();
  EdgeList edges;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (adjacency(i, j) > 0.5) edges.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(j));
    }
  }
  return Graph(static_cast<std::size_t>(n), std::move(edges));
}

namespace {

bool parse_id(std::string_view token, std::uint64_t& out) {
  if (token.empty() || token.front() == '-') return false;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
  return ec == std::errc{} && ptr == token.data() + token.size();
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

EdgeList load_edges(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open edge list " + path.string());
  EdgeList edges;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto tokens = split_ws(line);
    if (tokens.empty() || tokens.front().front() == '#') continue;
    std::uint64_t a = 0;
    std::uint64_t b = 0;
    if (tokens.size() != 2 || !parse_id(tokens[0], a) || !parse_id(tokens[1], b) ||
        a > UINT32_MAX || b > UINT32_MAX) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected \"u v\", got \"" +
                       line + "\"");
    }
    edges.emplace_back(static_cast<NodeId>(a), static_cast<NodeId>(b));
  }
  return edges;
}

Graph load_edge_list(const std::filesystem::path& path) {
  auto raw = load_edges(path);
  std::size_t n = 0;
  for (const auto& e : raw) n = std::max<std::size_t>(n, std::size_t{e.v} + 1);
  return Graph(n, std::move(raw));
}

void write_edge_list(const std::filesystem::path& path, const EdgeList& edges,
                     const std::string& header) {
  std::ostringstream out;
  if (!header.empty()) out << "# " << header << '\n';
  for (const auto& e : edges) out << e.u << ' ' << e.v << '\n';
  write_file_atomic(path, out.str());
}

void load_labels(const std::filesystem::path& path, Graph& g) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open label file " + path.string());
  std::vector<int> labels(g.num_nodes(), -1);
  std::string line;
  std::size_t line_no = 0;
  int max_label = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError(path.string() + ":" + std::to_string(line_no));
    std::uint64_t node = 0;
    std::uint64_t label = 0;
    std::string_view sv(line);
    if (!parse_id(sv.substr(0, comma), node) || !parse_id(sv.substr(comma + 1), label)) {
      if (line_no == 1) continue;  // header
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": bad label line");
    }
    if (node >= labels.size()) continue;
    labels[node] = static_cast<int>(label);
    max_label = std::max(max_label, static_cast<int>(label));
  }
  for (auto& l : labels) {
    if (l < 0) throw ParseError(path.string() + ": missing label for some node");
  }
  g.set_labels(std::move(labels), max_label + 1);
}

std::vector<int> bfs_distances(const Graph& g, NodeId source, int max_depth) {
  std::vector<int> dist(g.num_nodes(), -1);
  std::vector<NodeId> frontier{source};
  dist[source] = 0;
  std::size_t head = 0;
  while (head < frontier.size()) {
    NodeId u = frontier[head++];
    if (max_depth >= 0 && dist[u] >= max_depth) continue;
    for (NodeId w : g.neighbors(u)) {
      if (dist[w] < 0) {
        dist[w] = dist[u] + 1;
        frontier.push_back(w);
      }
    }
  }
  return dist;
}

bool is_connected(const Graph& g) {
  if (g.num_nodes() == 0) return true;
  auto dist = bfs_distances(g, 0);
  return std::none_of(dist.begin(), dist.end(), [](int d) { return d < 0; });
}

std::vector<int> connected_components(const Graph& g) {
  std::vector<int> comp(g.num_nodes(), -1);
  int next = 0;
  std::vector<NodeId> stack;
  for (NodeId s = 0; s < g.num_nodes(); ++s) {
    if (comp[s] >= 0) continue;
    comp[s] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      NodeId u = stack.back();
      stack.pop_back();
      for (NodeId w : g.neighbors(u)) {
        if (comp[w] < 0) {
          comp[w] = next;
          stack.push_back(w);
        }
      }
    }
    ++next;
  }
  return comp;
}

Graph induced_subgraph(const Graph& g, std::span<const NodeId> nodes) {
  std::vector<std::int64_t> local(g.num_nodes(), -1);
  for (std::size_t i = 0; i < nodes.size(); ++i) local[nodes[i]] = static_cast<std::int64_t>(i);
  EdgeList edges;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (NodeId w : g.neighbors(nodes[i])) {
      if (local[w] > static_cast<std::int64_t>(i)) {
        edges.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(local[w]));
      }
    }
  }
  Graph sub(nodes.size(), std::move(edges));
  if (g.has_labels()) {
    std::vector<int> labels(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) labels[i] = g.labels()[nodes[i]];
    sub.set_labels(std::move(labels), g.num_classes());
  }
  return sub;
}

ComponentResult largest_connected_component(const Graph& g) {
  if (g.num_nodes() == 0) return {};
  auto comp = connected_components(g);
  std::vector<std::size_t> sizes;
  for (int c : comp) {
    if (static_cast<std::size_t>(c) >= sizes.size()) sizes.resize(static_cast<std::size_t>(c) + 1, 0);
    ++sizes[static_cast<std::size_t>(c)];
  }
  // Components are numbered in order of their smallest node, so the first
  // maximum is the tie-break winner.
  auto best = static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
  ComponentResult out;
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    if (comp[v] == best) out.original_ids.push_back(v);
  }
  out.graph = induced_subgraph(g, out.original_ids);
  return out;
}

std::vector<NodeId> ego_nodes(const Graph& g, NodeId center, int hops) {
  std::vector<NodeId> frontier{center};
  std::vector<NodeId> out{center};
  std::vector<char> seen(g.num_nodes(), 0);
  seen[center] = 1;
  for (int h = 0; h < hops && !frontier.empty(); ++h) {
    std::vector<NodeId> next;
    for (NodeId u : frontier) {
      for (NodeId w : g.neighbors(u)) {
        if (!seen[w]) {
          seen[w] = 1;
          next.push_back(w);
          out.push_back(w);
        }
      }
    }
    frontier = std::move(next);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace subdiff
