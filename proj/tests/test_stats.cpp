#include <doctest.h>

#include "helpers.hpp"
#include "subdiff/stats.hpp"

using namespace subdiff;
using namespace testing;

TEST_SUITE("stats") {

TEST_CASE("K3 and P3") {
  const Graph k3 = complete_graph(3);
  CHECK(count_triangles(k3) == 1);
  CHECK(transitivity(k3) == doctest::Approx(1.0));
  CHECK(characteristic_path_length(k3) == doctest::Approx(1.0));
  const Graph p3 = path_graph(3);
  CHECK(characteristic_path_length(p3) == doctest::Approx(4.0 / 3.0));
  CHECK(transitivity(p3) == 0.0);
}

TEST_CASE("triangle counts") {
  auto per = count_triangles_per_node(complete_graph(4));
  CHECK(per == std::vector<std::uint64_t>{3, 3, 3, 3});
  CHECK(count_triangles(complete_graph(4)) == 4);
  CHECK(count_triangles(star_graph(6)) == 0);
  const Graph g = gnp(8, 0.5, 1);
  std::uint64_t brute = 0;
  for (NodeId a = 0; a < 8; ++a)
    for (NodeId b = a + 1; b < 8; ++b)
      for (NodeId c = b + 1; c < 8; ++c) brute += g.has_edge(a, b) && g.has_edge(b, c) && g.has_edge(a, c);
  CHECK(count_triangles(g) == brute);
}

TEST_CASE("assortativity equals the Pearson correlation over oriented edges") {
  const Graph g = gnp(40, 0.1, 6);
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& e : g.edges()) {
    const double du = static_cast<double>(g.degree(e.u));
    const double dv = static_cast<double>(g.degree(e.v));
    x.insert(x.end(), {du, dv});
    y.insert(y.end(), {dv, du});
  }
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  CHECK(degree_assortativity(g) == doctest::Approx(sxy / std::sqrt(sxx * syy)).epsilon(1e-12));
  CHECK(degree_assortativity(star_graph(5)) == doctest::Approx(-1.0));
  CHECK(degree_assortativity(cycle_graph(6)) == 0.0);
}

TEST_CASE("characteristic path length matches Floyd-Warshall") {
  const Graph g = gnp(30, 0.12, 2);
  auto lcc = largest_connected_component(g).graph;
  const std::size_t n = lcc.num_nodes();
  std::vector<std::vector<int>> d(n, std::vector<int>(n, 1 << 20));
  for (NodeId i = 0; i < n; ++i) d[i][i] = 0;
  for (const auto& e : lcc.edges()) d[e.u][e.v] = d[e.v][e.u] = 1;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  double total = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) total += d[i][j];
  CHECK(characteristic_path_length(lcc) == doctest::Approx(total / (n * (n - 1) / 2.0)).epsilon(1e-12));
  CHECK_THROWS(characteristic_path_length(Graph(3, {{0, 1}})));
}

TEST_CASE("power-law exponent follows its closed form") {
  const Graph g = star_graph(4);  // degrees 4,1,1,1,1
  const double expected = 1.0 + 5.0 / (std::log(8.0) + 4 * std::log(2.0));
  CHECK(power_law_exponent(g) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("degree alignment and aligned overlap") {
  const Graph g = star_graph(3);
  auto rank = degree_alignment(g);
  CHECK(rank[0] == 0);
  CHECK(rank[1] == 1);
  CHECK(rank[3] == 3);
  // A relabelled star is the same star after alignment.
  const Graph h(4, {{2, 0}, {2, 1}, {2, 3}});
  CHECK(aligned_edge_overlap_pct(h, g) == doctest::Approx(100.0));
  auto s = graph_stats(h, &g);
  REQUIRE(s.edge_overlap_pct);
  CHECK(*s.edge_overlap_pct == doctest::Approx(100.0));
}

}  // TEST_SUITE
