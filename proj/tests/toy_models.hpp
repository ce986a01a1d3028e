#pragma once

#include "helpers.hpp"
#include "subdiff/diffusion.hpp"
#include "subdiff/subgraph.hpp"

namespace testing {

/// The labelled house as a single training subgraph with its own context.
inline const subdiff::Subgraph& house_subgraph() {
  static const subdiff::Subgraph s = [] {
    Graph g = house_graph();
    g.set_labels({1, 1, 2, 2, 3}, 4);
    std::vector<NodeId> all{0, 1, 2, 3, 4};
    return subdiff::make_subgraph(g, subdiff::global_context(g, 2), all, 0);
  }();
  return s;
}

/// Overfit on the house; trained once per test process (~15 s).
inline const subdiff::DiffusionModel& house_model() {
  static const subdiff::DiffusionModel m = [] {
    subdiff::TrainConfig tc;
    tc.T = 100;
    tc.steps = 2000;
    tc.batch = 4;
    tc.seed = 1;
    tc.use_labels = true;
    tc.net.num_classes = 4;
    tc.net.n_max = 5;
    tc.net.context_dim = static_cast<int>(house_subgraph().context.cols());
    return subdiff::train({house_subgraph()}, tc);
  }();
  return m;
}

}  // namespace testing
