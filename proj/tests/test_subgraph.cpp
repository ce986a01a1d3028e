#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <set>

#include "helpers.hpp"
#include "subdiff/spectral.hpp"
#include "subdiff/subgraph.hpp"

using namespace subdiff;
using namespace testing;

namespace {

bool rows_distinct(const Eigen::MatrixXd& c) {
  for (Eigen::Index a = 0; a < c.rows(); ++a) {
    for (Eigen::Index b = a + 1; b < c.rows(); ++b) {
      if ((c.row(a) - c.row(b)).cwiseAbs().maxCoeff() <= 1e-12) return false;
    }
  }
  return true;
}

/// Nonzero Laplacian spectrum straight from Eigen's dense solver.
Eigen::VectorXd dense_nonzero_spectrum(const Graph& g) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(laplacian_matrix(g));
  return es.eigenvalues().tail(g.num_nodes() - 1);
}

}  // namespace

TEST_SUITE("subgraph") {

TEST_CASE("P3 Fiedler pair") {
  auto e = laplacian_eigens(path_graph(3), 1);
  CHECK(e.values(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(e.vectors(0, 0) == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-10));
  CHECK(std::abs(e.vectors(1, 0)) < 1e-10);
  CHECK(e.vectors(2, 0) == doctest::Approx(-1 / std::sqrt(2.0)).epsilon(1e-10));
}

TEST_CASE("K4 and S5 spectra match the dense solver") {
  auto k4 = laplacian_eigens(complete_graph(4), 3);
  for (int i = 0; i < 3; ++i) CHECK(k4.values(i) == doctest::Approx(4.0).epsilon(1e-10));
  const Graph s5 = star_graph(4);
  auto s = laplacian_eigens(s5, 4);
  const Eigen::VectorXd ref = dense_nonzero_spectrum(s5);
  for (int i = 0; i < 4; ++i) CHECK(s.values(i) == doctest::Approx(ref(i)).epsilon(1e-10));
  CHECK(s.values(0) == doctest::Approx(1.0));
  CHECK(s.values(3) == doctest::Approx(5.0));
}

TEST_CASE("eigenvectors are unit, orthogonal and satisfy L v = lambda v") {
  const Graph g = gnp(30, 0.2, 5);
  REQUIRE(is_connected(g));
  auto e = laplacian_eigens(g, 5);
  const Eigen::MatrixXd L = laplacian_matrix(g);
  const Eigen::VectorXd ref = dense_nonzero_spectrum(g);
  for (int i = 0; i < 5; ++i) {
    CHECK(e.values(i) == doctest::Approx(ref(i)).epsilon(1e-9));
    CHECK((L * e.vectors.col(i) - e.values(i) * e.vectors.col(i)).norm() < 1e-9);
    CHECK(e.vectors.col(i).norm() == doctest::Approx(1.0));
  }
  CHECK((e.vectors.transpose() * e.vectors - Eigen::MatrixXd::Identity(5, 5)).norm() < 1e-9);
  CHECK_THROWS_AS(laplacian_eigens(Graph(3, {{0, 1}}), 1), DisconnectedGraphError);
}

TEST_CASE("global context: P4 needs no tie column") {
  auto c = global_context(path_graph(4), 1);
  CHECK(c.cols() == 1);
  CHECK(rows_distinct(c));
  // Fiedler vector of a path is strictly monotone
  const bool up = c(1, 0) > c(0, 0);
  for (int i = 0; i + 1 < 4; ++i) CHECK((c(i + 1, 0) > c(i, 0)) == up);
}

TEST_CASE("global context: K4 collides and gets a tie column") {
  // One vector of the triple eigenspace leaves two rows at zero.
  auto c = global_context(complete_graph(4), 1);
  CHECK(c.cols() == 2);
  CHECK(rows_distinct(c));
  // Wider windows depend on the basis LAPACK picks; only distinctness is promised.
  for (int d : {2, 3}) CHECK(rows_distinct(global_context(complete_graph(4), d)));
}

TEST_CASE("global context: S5 leaves collide, center stays separated") {
  const Graph s5 = star_graph(4);
  auto c = global_context(s5, 2);
  CHECK(c.cols() == 3);
  CHECK(rows_distinct(c));
  // The tie column alone sets the center (degree 4) apart from every leaf.
  for (int leaf = 1; leaf <= 4; ++leaf) CHECK(c(0, 2) - c(leaf, 2) > 0.5);
}

TEST_CASE("global context is deterministic") {
  const Graph g = gnp(40, 0.15, 8);
  REQUIRE(is_connected(g));
  CHECK(global_context(g, 3) == global_context(g, 3));
}

TEST_CASE("cycle counts match brute force on random graphs") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Graph g = gnp(8, 0.5, seed);
    const auto cc = cycle_counts(g.adjacency_matrix());
    const auto t3 = brute_cycles(g, 3);
    const auto t4 = brute_cycles(g, 4);
    const auto t5 = brute_cycles(g, 5);
    for (NodeId v = 0; v < 8; ++v) {
      CHECK(cc.triangles(v) == doctest::Approx(t3[v]));
      CHECK(cc.four(v) == doctest::Approx(t4[v]));
      CHECK(cc.five(v) == doctest::Approx(t5[v]));
    }
  }
}

TEST_CASE("cycle counts on small named graphs") {
  auto k4 = cycle_counts(complete_graph(4).adjacency_matrix());
  CHECK(k4.triangles.sum() / 3 == doctest::Approx(4.0));
  for (int v = 0; v < 4; ++v) CHECK(k4.triangles(v) == doctest::Approx(3.0));
  auto star = cycle_counts(star_graph(5).adjacency_matrix());
  CHECK(star.triangles.cwiseAbs().sum() == 0.0);
  CHECK(star.four.cwiseAbs().sum() == 0.0);
  auto c5 = cycle_counts(cycle_graph(5).adjacency_matrix());
  for (int v = 0; v < 5; ++v) {
    CHECK(c5.four(v) == doctest::Approx(0.0));
    CHECK(c5.five(v) == doctest::Approx(1.0));
  }
}

TEST_CASE("local context examples and range") {
  auto empty = local_context(Graph(5), 10);
  CHECK(empty.col(kDegree).cwiseAbs().sum() == 0.0);
  CHECK(empty.col(kDensity).cwiseAbs().sum() == 0.0);
  auto k4 = local_context(complete_graph(4), 10);
  for (int v = 0; v < 4; ++v) {
    CHECK(k4(v, kDegree) == doctest::Approx(1.0));
    CHECK(k4(v, kClustering) == doctest::Approx(1.0));
    CHECK(k4(v, kTriangles) == doctest::Approx(1.0));
    CHECK(k4(v, kSizeRatio) == doctest::Approx(0.4));
  }
  auto k6 = local_context(complete_graph(6), 6);
  for (int v = 0; v < 6; ++v) {
    CHECK(k6(v, kFourCycles) == doctest::Approx(1.0));
    CHECK(k6(v, kFiveCycles) == doctest::Approx(1.0));
  }
  const Graph g = gnp(20, 0.3, 2);
  auto q = local_context(g, 50);
  CHECK(q.minCoeff() >= 0.0);
  CHECK(q.maxCoeff() <= 1.0);
}

TEST_CASE("ego networks") {
  const Graph star = star_graph(4);
  auto egos = sample_ego_networks(star, global_context(star, 2), 1);
  CHECK(egos[0].size() == 5);
  CHECK(egos[0].graph.edges() == star.edges());
  const Graph p3 = path_graph(3);
  for (const auto& s : sample_ego_networks(p3, global_context(p3, 1), 2)) CHECK(s.size() == 3);
  auto e1 = sample_ego_networks(p3, global_context(p3, 1), 1);
  CHECK(e1[0].size() == 2);
  CHECK(e1[1].size() == 3);
  CHECK(e1[1].parent_ids[e1[1].center] == 1);
  CHECK(e1[0].context.row(1) == global_context(p3, 1).row(1));
}

TEST_CASE("subsample: small subgraphs are untouched") {
  const Graph g = cycle_graph(10);
  auto s = make_subgraph(g, global_context(g, 2), {0, 1, 2, 3, 4, 5, 6, 7, 8, 9}, 3);
  auto out = subsample(s, 50, 1);
  CHECK(out.parent_ids == s.parent_ids);
  CHECK(out.graph.edges() == s.graph.edges());
}

TEST_CASE("subsample: K100 gives exactly n_max nodes") {
  const Graph g = complete_graph(100);
  std::vector<NodeId> all(100);
  std::iota(all.begin(), all.end(), 0);
  auto s = make_subgraph(g, Eigen::MatrixXd(), all, 17);
  auto out = subsample(s, 50, 3);
  CHECK(out.size() == 50);
  CHECK(out.parent_ids[out.center] == 17);
}

TEST_CASE("subsample: large sparse ego net stays connected and keeps the center") {
  const Graph g = gnp(300, 0.02, 11);
  auto lcc = largest_connected_component(g);
  std::vector<NodeId> all(lcc.graph.num_nodes());
  std::iota(all.begin(), all.end(), 0);
  auto s = make_subgraph(lcc.graph, Eigen::MatrixXd(), all, 0);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto out = subsample(s, 50, seed);
    CHECK(out.size() <= 50);
    CHECK(out.size() >= 2);
    CHECK(out.parent_ids[out.center] == 0);
    CHECK(is_connected(out.graph));
  }
  CHECK(subsample(s, 50, 4).parent_ids == subsample(s, 50, 4).parent_ids);
}

TEST_CASE("histograms") {
  const Graph p3 = path_graph(3);
  auto h = build_histograms(sample_ego_networks(p3, global_context(p3, 1), 1));
  CHECK(h.size == std::map<std::size_t, std::size_t>{{2, 2}, {3, 1}});
  CHECK(h.global.size() == 3);
  CHECK(h.total_subgraphs() == 3);
  const Graph g = gnp(25, 0.2, 3);
  REQUIRE(is_connected(g));
  auto egos = sample_ego_networks(g, global_context(g, 2), 2);
  auto hist = build_histograms(egos);
  CHECK(hist.global.size() == 25);
  for (const auto& [row, entry] : hist.global) CHECK(entry.count >= 1);
}

}  // TEST_SUITE
