#include <doctest.h>

#include "helpers.hpp"
#include "subdiff/metrics.hpp"

using namespace subdiff;
using namespace testing;

TEST_SUITE("metrics") {

TEST_CASE("consensus examples") {
  const Graph target = path_graph(4);                 // 01 12 23
  const Graph observed(4, {{0, 1}});                  // missing 12 and 23
  const EdgeList missing{{1, 2}, {2, 3}};
  CHECK(consensus({target, target}, missing, target) == 1.0);
  CHECK(consensus({observed, observed}, missing, target) == 0.0);
  const Graph one(4, {{0, 1}, {1, 2}});
  CHECK(consensus({target, one}, missing, target) == doctest::Approx(0.75));
  // Added-edge sets count a sample as agreeing when it drops the pair.
  const Graph noisy(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}});
  CHECK(consensus({target, noisy}, {{0, 3}}, target) == doctest::Approx(0.5));
  CHECK_THROWS(consensus({target}, {}, target));
}

TEST_CASE("diversity examples") {
  const Graph a = path_graph(3), b = complete_graph(3);
  auto same = diversity({a, a, a, a});
  CHECK(same.diversity == 0.0);
  CHECK(same.distinct_fraction == doctest::Approx(0.25));
  CHECK(diversity({a, b, Graph(3)}).diversity == 1.0);
  CHECK(diversity({a, a, b}).diversity == doctest::Approx(2.0 / 3.0));
  CHECK_THROWS(diversity({a}));
}

TEST_CASE("sparsity examples") {
  const Graph t = cycle_graph(10);
  CHECK(sparsity({t}, t) == 1.0);
  const Graph g8(10, EdgeList(t.edges().begin(), t.edges().begin() + 8));
  const Graph g12(10, edge_union(t.edges(), {{0, 5}, {1, 6}}));
  CHECK(sparsity({g8, g12}, t) == doctest::Approx(1.0));
  const Graph g9(10, EdgeList(t.edges().begin(), t.edges().begin() + 9));
  CHECK(sparsity({g9}, t) == doctest::Approx(0.9));
  CHECK_THROWS(sparsity({t}, Graph(10)));
}

TEST_CASE("edge overlap examples") {
  const Graph p3 = path_graph(3);
  CHECK(edge_overlap({Graph(3, {{0, 1}})}, p3) == doctest::Approx(0.5));
  CHECK(edge_overlap({Graph(3, {{0, 2}})}, p3) == 0.0);
  CHECK(edge_overlap({complete_graph(3)}, p3) == 1.0);
  // Aligned: a relabelled path matches after degree ordering.
  const Graph p3b(3, {{0, 2}, {2, 1}});
  CHECK(edge_overlap({p3b}, p3, false) == 0.5);
  CHECK(edge_overlap({p3b}, p3, true) == 1.0);
  CHECK(edge_overlap_target_norm({p3}, p3, complete_graph(3)) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("evaluate fills every field and flags the sparsity range") {
  const Graph target = cycle_graph(6);
  const Graph observed(6, EdgeList(target.edges().begin(), target.edges().begin() + 5));
  const EdgeList missing = edge_difference(target.edges(), observed.edges());
  auto m = evaluate("expand", {target, observed}, observed, target, missing);
  REQUIRE(m.consensus);
  CHECK(*m.consensus == doctest::Approx(0.5));
  CHECK(m.diversity == 1.0);
  CHECK(m.edge_overlap == 1.0);
  CHECK(m.sparsity_in_range);
  CHECK(m.edit_set_size == 1);
  auto j = m.to_json();
  for (const char* key : {"consensus", "diversity", "sparsity", "edge_overlap", "R", "distinct_fraction"}) {
    CHECK(j.contains(key));
  }
  auto empty = evaluate("expand", {observed}, observed, target, {});
  CHECK_FALSE(empty.consensus);
  CHECK(empty.to_json()["consensus"].is_null());
  auto low = evaluate("denoise", {Graph(6, {{0, 1}})}, observed, target, missing);
  CHECK_FALSE(low.sparsity_in_range);
}

}  // TEST_SUITE
