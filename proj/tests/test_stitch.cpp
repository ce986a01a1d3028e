#include <doctest.h>

#include <map>

#include "helpers.hpp"
#include "subdiff/datasets.hpp"
#include "subdiff/stitch.hpp"

using namespace subdiff;
using namespace testing;

namespace {

Piece piece(const Graph& g, const std::vector<double>& ids) {
  Piece p;
  p.graph = g;
  for (double x : ids) p.rows.push_back({x});
  return p;
}

/// Maps a coalesced graph back to original ids through the context rows.
EdgeList to_original(const Coalesced& c, const Eigen::MatrixXd& context) {
  std::map<ContextRow, NodeId> owner;
  for (Eigen::Index v = 0; v < context.rows(); ++v) owner[context_row(context, v)] = static_cast<NodeId>(v);
  EdgeList out;
  for (const auto& e : c.graph.edges()) out.emplace_back(owner.at(c.rows[e.u]), owner.at(c.rows[e.v]));
  return canonical_edges(std::move(out));
}

void check_reconstruction(const Graph& g, int hops) {
  const auto c = global_context(g, 2);
  std::vector<Piece> pieces;
  for (const auto& s : sample_ego_networks(g, c, hops)) pieces.push_back(piece_from_subgraph(s));
  auto merged = coalesce(pieces);
  CHECK(merged.graph.num_nodes() == g.num_nodes());
  CHECK(to_original(merged, c) == g.edges());
  CHECK(std::is_sorted(merged.rows.begin(), merged.rows.end()));
}

}  // namespace

TEST_SUITE("stitch") {

TEST_CASE("coalesce: single piece, disjoint pieces, duplicates, shared node") {
  const Graph tri = complete_graph(3);
  CHECK(coalesce({piece(tri, {0.1, 0.2, 0.3})}).graph.edges() == tri.edges());

  auto disjoint = coalesce({piece(tri, {0.1, 0.2, 0.3}), piece(tri, {0.4, 0.5, 0.6})});
  CHECK(disjoint.graph.num_nodes() == 6);
  CHECK(disjoint.graph.num_edges() == 6);
  CHECK(connected_components(disjoint.graph)[0] != connected_components(disjoint.graph)[5]);

  auto dup = coalesce({piece(tri, {0.1, 0.2, 0.3}), piece(tri, {0.1, 0.2, 0.3})});
  CHECK(dup.graph.edges() == tri.edges());

  // triangle {a,b,c} and path c-d meet only at c
  auto shared = coalesce({piece(tri, {0.1, 0.2, 0.3}), piece(path_graph(2), {0.3, 0.4})});
  CHECK(shared.graph.num_nodes() == 4);
  CHECK(shared.graph.num_edges() == 4);
  CHECK(shared.graph.degree(2) == 3);
}

TEST_CASE("coalesce: epsilon matching and its errors") {
  const Graph e = path_graph(2);
  auto near = coalesce({piece(e, {0.1, 0.2}), piece(e, {0.1 + 1e-9, 0.5})}, 1e-6);
  CHECK(near.graph.num_nodes() == 3);
  CHECK(coalesce({piece(e, {0.1, 0.2}), piece(e, {0.1 + 1e-9, 0.5})}).graph.num_nodes() == 4);
  CHECK_THROWS(coalesce({piece(e, {0.1, 0.3}), piece(Graph(1), {0.2})}, 0.15));
  CHECK_THROWS(coalesce({piece(e, {0.1, 0.1})}));
  CHECK_THROWS(coalesce({piece(e, {0.1})}));
}

TEST_CASE("ego networks coalesce back to the graph") {
  check_reconstruction(path_graph(10), 2);
  check_reconstruction(complete_graph(6), 2);
  check_reconstruction(barabasi_albert(100, 3, 1), 2);
  check_reconstruction(barabasi_albert(80, 2, 5), 1);
}

TEST_CASE("generate_large covers every row and is deterministic") {
  const Graph g = barabasi_albert(30, 2, 2);
  const auto c = global_context(g, 2);
  auto subs = subsample_all(sample_ego_networks(g, c, 1), 12, 0);
  TrainConfig tc;
  tc.T = 5;
  tc.steps = 0;
  tc.net.layers = 1;
  tc.net.hidden = 8;
  tc.net.edge_channels = 2;
  tc.net.pair_dim = 4;
  tc.net.time_dim = 4;
  tc.net.n_max = 12;
  tc.net.context_dim = static_cast<int>(c.cols());
  auto model = train(subs, tc);
  StitchOptions opt;
  opt.seed = 4;
  std::size_t observed_pieces = 0;
  auto res = generate_large(model, opt, [&](std::size_t, const Piece& p) {
    ++observed_pieces;
    CHECK(p.rows.size() >= 2);
  });
  CHECK(res.graph.num_nodes() == 30);
  CHECK(res.iterations == observed_pieces);
  CHECK(res.source_nodes.size() == 30);
  std::vector<NodeId> src = res.source_nodes;
  std::sort(src.begin(), src.end());
  CHECK(std::adjacent_find(src.begin(), src.end()) == src.end());
  auto again = generate_large(model, opt);
  CHECK(again.graph.edges() == res.graph.edges());
  opt.max_iterations = 1;
  CHECK_THROWS(generate_large(model, opt));
}

}  // TEST_SUITE
