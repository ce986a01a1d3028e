#include "subdiff/subgraph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "subdiff/rng.hpp"
#include "subdiff/spectral.hpp"

namespace subdiff {

namespace {

bool rows_collide(const Eigen::MatrixXd& m) {
  const auto n = m.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if ((m.row(i) - m.row(j)).cwiseAbs().maxCoeff() <= 1e-12) return true;
    }
  }
  return false;
}

double safe_div(double num, double den) { return den > 0.0 ? num / den : 0.0; }

}  // namespace

Eigen::MatrixXd global_context(const Graph& g, int d) {
  auto eig = laplacian_eigens(g, d);
  Eigen::MatrixXd c = eig.vectors;
  if (!rows_collide(c)) return c;
  const auto n = c.rows();
  Eigen::VectorXd tie(n);
  for (Eigen::Index v = 0; v < n; ++v) {
    tie(v) = static_cast<double>(g.degree(static_cast<NodeId>(v))) + static_cast<double>(v) * 0x1.0p-32;
  }
  const double top = tie.maxCoeff();
  if (top > 0.0) tie /= top;
  Eigen::MatrixXd out(n, d + 1);
  out << c, tie;
  return out;
}

CycleCounts cycle_counts(const Eigen::MatrixXd& a) {
  const Eigen::MatrixXd a2 = a * a;
  const Eigen::MatrixXd a3 = a2 * a;
  const Eigen::VectorXd deg = a.rowwise().sum();
  const Eigen::VectorXd diag3 = a3.diagonal();
  const Eigen::VectorXd diag4 = a2.cwiseProduct(a2).rowwise().sum();
  const Eigen::VectorXd diag5 = a2.cwiseProduct(a3).rowwise().sum();

  CycleCounts out;
  out.triangles = diag3 / 2.0;
  // Closed 4-walks minus the two back-and-forth shapes, halved for direction.
  out.four = (diag4 - deg.cwiseProduct(deg - Eigen::VectorXd::Ones(deg.size())) - a * deg) / 2.0;
  // Closed 5-walks minus triangle-with-backtrack walks.
  out.five = (diag5 - 2.0 * diag3.cwiseProduct(deg) - a * diag3 + 5.0 * diag3 -
              2.0 * a.cwiseProduct(a2) * deg) /
             2.0;
  return out;
}

Eigen::MatrixXd local_context(const Eigen::MatrixXd& a, std::size_t n_max) {
  const auto n = a.rows();
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, kLocalFeatureCount);
  if (n == 0) return q;
  const double nd = static_cast<double>(n);
  const Eigen::VectorXd deg = a.rowwise().sum();
  const auto cycles = cycle_counts(a);
  const double tri_max = (nd - 1) * (nd - 2) / 2.0;
  const double four_max = tri_max * (nd - 3);
  const double five_max = four_max * (nd - 4);
  const double edges = deg.sum() / 2.0;
  const double density = safe_div(edges, nd * (nd - 1) / 2.0);
  const double size_ratio = safe_div(nd, static_cast<double>(n_max));
  for (Eigen::Index v = 0; v < n; ++v) {
    const double dv = deg(v);
    q(v, kDegree) = safe_div(dv, nd - 1);
    q(v, kTriangles) = safe_div(cycles.triangles(v), tri_max);
    q(v, kFourCycles) = safe_div(std::max(0.0, cycles.four(v)), four_max);
    q(v, kFiveCycles) = safe_div(std::max(0.0, cycles.five(v)), five_max);
    q(v, kClustering) = safe_div(cycles.triangles(v), dv * (dv - 1) / 2.0);
    q(v, kSizeRatio) = size_ratio;
    q(v, kDensity) = density;
  }
  return q;
}

Eigen::MatrixXd local_context(const Graph& g, std::size_t n_max) {
  return local_context(g.adjacency_matrix(), n_max);
}

Subgraph make_subgraph(const Graph& g, const Eigen::MatrixXd& context, std::vector<NodeId> nodes,
                       NodeId center) {
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  auto it = std::lower_bound(nodes.begin(), nodes.end(), center);
  if (it == nodes.end() || *it != center) throw std::invalid_argument("make_subgraph: center not in node set");
  Subgraph s;
  s.center = static_cast<std::size_t>(it - nodes.begin());
  s.graph = induced_subgraph(g, nodes);
  if (context.rows() > 0) {
    s.context.resize(static_cast<Eigen::Index>(nodes.size()), context.cols());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      s.context.row(static_cast<Eigen::Index>(i)) = context.row(nodes[i]);
    }
  }
  s.parent_ids = std::move(nodes);
  return s;
}

std::vector<Subgraph> sample_ego_networks(const Graph& g, const Eigen::MatrixXd& context, int hops) {
  if (hops < 1) throw std::invalid_argument("sample_ego_networks: hops must be >= 1");
  std::vector<Subgraph> out;
  out.reserve(g.num_nodes());
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    out.push_back(make_subgraph(g, context, ego_nodes(g, v, hops), v));
  }
  return out;
}

namespace {

/// Local ids reachable from `start` inside `g`.
std::vector<NodeId> component_of(const Graph& g, NodeId start) {
  auto dist = bfs_distances(g, start);
  std::vector<NodeId> out;
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    if (dist[v] >= 0) out.push_back(v);
  }
  return out;
}

Subgraph restrict(const Subgraph& s, const std::vector<NodeId>& local_nodes) {
  std::vector<NodeId> parents;
  parents.reserve(local_nodes.size());
  for (NodeId l : local_nodes) parents.push_back(s.parent_ids[l]);
  Subgraph out;
  out.graph = induced_subgraph(s.graph, local_nodes);
  out.parent_ids = std::move(parents);
  auto it = std::find(local_nodes.begin(), local_nodes.end(), static_cast<NodeId>(s.center));
  out.center = static_cast<std::size_t>(it - local_nodes.begin());
  if (s.context.rows() > 0) {
    out.context.resize(static_cast<Eigen::Index>(local_nodes.size()), s.context.cols());
    for (std::size_t i = 0; i < local_nodes.size(); ++i) {
      out.context.row(static_cast<Eigen::Index>(i)) = s.context.row(local_nodes[i]);
    }
  }
  return out;
}

}  // namespace

Subgraph subsample(const Subgraph& s, std::size_t n_max, std::uint64_t seed) {
  if (n_max < 2) throw std::invalid_argument("subsample: n_max must be >= 2");
  if (s.size() <= n_max) return s;
  Rng rng = make_rng(seed, s.parent_ids[s.center]);
  std::vector<NodeId> others;
  for (NodeId v = 0; v < s.size(); ++v) {
    if (v != s.center) others.push_back(v);
  }
  for (int attempt = 0; attempt < 20; ++attempt) {
    // Partial Fisher-Yates: the first n_max - 1 entries become the sample.
    for (std::size_t i = 0; i + 1 < n_max; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, others.size() - 1);
      std::swap(others[i], others[pick(rng)]);
    }
    std::vector<NodeId> chosen(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(n_max - 1));
    chosen.push_back(static_cast<NodeId>(s.center));
    std::sort(chosen.begin(), chosen.end());
    Graph induced = induced_subgraph(s.graph, chosen);
    auto center_pos = static_cast<NodeId>(
        std::lower_bound(chosen.begin(), chosen.end(), static_cast<NodeId>(s.center)) - chosen.begin());
    auto comp = component_of(induced, center_pos);
    if (comp.size() >= 2) {
      std::vector<NodeId> local;
      local.reserve(comp.size());
      for (NodeId c : comp) local.push_back(chosen[c]);
      return restrict(s, local);
    }
  }
  std::vector<NodeId> local{static_cast<NodeId>(s.center)};
  for (NodeId w : s.graph.neighbors(static_cast<NodeId>(s.center))) {
    if (local.size() >= n_max) break;
    local.push_back(w);
  }
  std::sort(local.begin(), local.end());
  return restrict(s, local);
}

std::vector<Subgraph> subsample_all(const std::vector<Subgraph>& subgraphs, std::size_t n_max,
                                    std::uint64_t seed) {
  std::vector<Subgraph> out;
  out.reserve(subgraphs.size());
  for (const auto& s : subgraphs) out.push_back(subsample(s, n_max, seed));
  return out;
}

ContextRow context_row(const Eigen::MatrixXd& context, Eigen::Index row) {
  ContextRow r(static_cast<std::size_t>(context.cols()));
  for (Eigen::Index j = 0; j < context.cols(); ++j) r[static_cast<std::size_t>(j)] = context(row, j);
  return r;
}

std::size_t Histograms::total_subgraphs() const {
  std::size_t total = 0;
  for (const auto& [n, count] : size) total += count;
  return total;
}

Histograms build_histograms(const std::vector<Subgraph>& subgraphs) {
  Histograms h;
  for (const auto& s : subgraphs) {
    ++h.size[s.size()];
    for (std::size_t i = 0; i < s.size(); ++i) {
      auto& entry = h.global[context_row(s.context, static_cast<Eigen::Index>(i))];
      ++entry.count;
      entry.node = s.parent_ids[i];
    }
  }
  return h;
}

}  // namespace subdiff
