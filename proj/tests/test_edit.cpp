#include <doctest.h>

#include "helpers.hpp"
#include "subdiff/datasets.hpp"
#include "subdiff/edit.hpp"
#include "toy_models.hpp"

using namespace subdiff;
using namespace testing;
using Eigen::MatrixXd;

namespace {

bool contains(const MatrixXd& big, const MatrixXd& small) {
  return (small.array() <= big.array()).all();
}

EditRequest house_request(const Graph& observed, EditTask task, int R, std::uint64_t seed) {
  EditRequest req;
  req.observed = house_subgraph();
  req.observed.graph = observed;
  req.task = task;
  req.R = R;
  req.seed = seed;
  return req;
}

Graph labelled(Graph g) {
  g.set_labels({1, 1, 2, 2, 3}, 4);
  return g;
}

/// Ego nets of a small BA-Shapes graph for regressor work.
const std::vector<Subgraph>& toy_subgraphs() {
  static const std::vector<Subgraph> subs = [] {
    BaShapesParams p;
    p.n_base = 60;
    p.m = 2;
    p.n_motifs = 8;
    p.seed = 3;
    auto shapes = generate_ba_shapes(p);
    auto c = global_context(shapes.graph, 2);
    return subsample_all(sample_ego_networks(shapes.graph, c, 1), 20, 1);
  }();
  return subs;
}

DiffusionModel untrained_toy_model(const std::vector<Subgraph>& data) {
  TrainConfig tc;
  tc.T = 20;
  tc.steps = 0;
  tc.net.layers = 1;
  tc.net.hidden = 8;
  tc.net.edge_channels = 2;
  tc.net.pair_dim = 4;
  tc.net.time_dim = 4;
  tc.net.n_max = 20;
  tc.net.context_dim = static_cast<int>(data[0].context.cols());
  return train(data, tc);
}

}  // namespace

TEST_SUITE("edit") {

TEST_CASE("attribute values") {
  CHECK(attribute_value(complete_graph(4), StyleAttr::sum_degree) == 12.0);
  CHECK(attribute_value(house_graph(), StyleAttr::triangles) == 1.0);
  CHECK(attribute_value(star_graph(5), StyleAttr::max_degree) == 5.0);
  CHECK(parse_regressor_arch("mp-sum") == RegressorArch::mp_sum);
  CHECK_THROWS(parse_edit_task("nope"));
}

TEST_CASE("expansion keeps observed edges at every step and recovers the roof") {
  const auto& model = house_model();
  Graph obs = labelled(Graph(5, {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {0, 4}}));
  auto req = house_request(obs, EditTask::expand, 64, 5);
  const MatrixXd a_obs = obs.adjacency_matrix();
  bool always = true;
  auto outs = expand(req, model, [&](int, const DiffusionState& st) { always = always && contains(st.A, a_obs); });
  CHECK(always);
  int recovered = 0;
  for (const auto& g : outs) {
    CHECK(edge_difference(obs.edges(), g.edges()).empty());
    recovered += g.has_edge(1, 4);
  }
  CHECK(recovered > 32);
}

TEST_CASE("expansion of a complete graph is the identity") {
  const auto& model = house_model();
  Graph obs = labelled(complete_graph(5));
  for (const auto& g : expand(house_request(obs, EditTask::expand, 4, 1), model)) CHECK(g.edges() == obs.edges());
}

TEST_CASE("denoising stays inside the observed edges and drops a planted chord") {
  const auto& model = house_model();
  Graph obs = labelled(Graph(5, edge_union(house_graph().edges(), {{0, 2}})));
  auto req = house_request(obs, EditTask::denoise, 64, 6);
  const MatrixXd a_obs = obs.adjacency_matrix();
  bool always = true;
  auto outs = denoise(req, model, [&](int, const DiffusionState& st) { always = always && contains(a_obs, st.A); });
  CHECK(always);
  int good = 0;
  for (const auto& g : outs) {
    CHECK(edge_difference(g.edges(), obs.edges()).empty());
    const auto kept = edge_intersection(g.edges(), house_graph().edges()).size();
    good += !g.has_edge(0, 2) && kept >= 5;
  }
  CHECK(good > 32);
}

TEST_CASE("denoising an edgeless graph or a star") {
  const auto& model = house_model();
  for (const auto& g : denoise(house_request(labelled(Graph(5)), EditTask::denoise, 3, 2), model)) {
    CHECK(g.num_edges() == 0);
  }
  Graph star = labelled(star_graph(4));
  for (const auto& g : denoise(house_request(star, EditTask::denoise, 3, 2), model)) {
    CHECK(edge_difference(g.edges(), star.edges()).empty());
  }
}

TEST_CASE("edits are deterministic under a fixed seed") {
  const auto& model = house_model();
  Graph obs = labelled(Graph(5, {{0, 1}, {1, 2}, {2, 3}}));
  auto a = expand(house_request(obs, EditTask::expand, 4, 9), model);
  auto b = expand(house_request(obs, EditTask::expand, 4, 9), model);
  for (int r = 0; r < 4; ++r) CHECK(a[r].edges() == b[r].edges());
}

TEST_CASE("edit requests are validated") {
  const auto& model = house_model();
  auto req = house_request(labelled(house_graph()), EditTask::expand, 0, 1);
  CHECK_THROWS(expand(req, model));
  req.R = 1;
  req.observed.context = MatrixXd::Zero(5, 7);
  CHECK_THROWS(expand(req, model));
  req = house_request(labelled(house_graph()), EditTask::style, 1, 1);
  CHECK_THROWS(style_transfer(req, model));
}

TEST_CASE("regressor gradients match central differences for every architecture") {
  const auto& data = toy_subgraphs();
  auto model = untrained_toy_model(data);
  for (auto arch : {RegressorArch::mp, RegressorArch::mp_sum, RegressorArch::attn}) {
    RegressorConfig rc;
    rc.arch = arch;
    rc.hidden = 6;
    rc.time_dim = 4;
    rc.steps = 0;
    Regressor reg = train_regressor(data, model, rc);
    auto rng = make_rng(2);
    std::vector<Example> batch;
    for (int i = 0; i < 2; ++i) {
      batch.push_back({&data[i], forward_sample(data[i], 5, model.schedule, model.transition, 20, false, rng)});
    }
    ParamSet grad;
    regressor_loss_and_grad(reg, batch, &grad);
    const double h = 1e-4;
    for (auto& [name, m] : reg.params) {
      MatrixXd fd(m.rows(), m.cols());
      for (Eigen::Index i = 0; i < m.size(); ++i) {
        const double keep = m.data()[i];
        m.data()[i] = keep + h;
        const double up = regressor_loss_and_grad(reg, batch, nullptr);
        m.data()[i] = keep - h;
        const double down = regressor_loss_and_grad(reg, batch, nullptr);
        m.data()[i] = keep;
        fd.data()[i] = (up - down) / (2 * h);
      }
      const MatrixXd& an = grad.at(name);
      INFO(to_string(arch) << " " << name);
      CHECK((an - fd).norm() / std::max({an.norm(), fd.norm(), 1e-12}) < 1e-4);
    }
  }
}

TEST_CASE("guidance gradient is the symmetric derivative in the relaxed adjacency") {
  const auto& data = toy_subgraphs();
  auto model = untrained_toy_model(data);
  RegressorConfig rc;
  rc.steps = 50;
  rc.hidden = 8;
  Regressor reg = train_regressor(data, model, rc);
  auto rng = make_rng(4);
  const auto& s = data[3];
  auto st = forward_sample(s, 6, model.schedule, model.transition, 20, false, rng);
  const double target = 10.0;
  MatrixXd g = guidance_gradient(reg, st, target);
  auto objective = [&](const MatrixXd& a) {
    DiffusionState x = st;
    x.A = a;
    const double z = (regressor_predict(reg, x) - target) / reg.y_std;
    return z * z;
  };
  const double h = 1e-6;
  const auto n = st.A.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    CHECK(g(i, i) == 0.0);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      MatrixXd up = st.A, down = st.A;
      up(i, j) += h, up(j, i) += h;
      down(i, j) -= h, down(j, i) -= h;
      CHECK(g(i, j) == doctest::Approx((objective(up) - objective(down)) / (2 * h)).epsilon(1e-5));
    }
  }
}

TEST_CASE("apply_guidance: lambda 0 is the identity, positive gradient lowers presence") {
  MatrixXd p(3, 3);
  p << 0, 0.3, 1.0, 0.3, 0, 0.7, 1.0, 0.7, 0;
  MatrixXd g = MatrixXd::Constant(3, 3, 0.5);
  MatrixXd same = p;
  apply_guidance(same, g, 0.0);
  CHECK((same - p).cwiseAbs().maxCoeff() < 1e-12);
  MatrixXd moved = p;
  apply_guidance(moved, g, 2.0);
  CHECK(moved(0, 1) < p(0, 1));
  CHECK(moved(1, 2) < p(1, 2));
  CHECK(moved(0, 2) == 1.0);  // certain states stay certain
  // Closed form: p e^{-lg} / (p e^{-lg} + 1 - p)
  CHECK(moved(0, 1) == doctest::Approx(0.3 * std::exp(-1.0) / (0.3 * std::exp(-1.0) + 0.7)).epsilon(1e-12));
}

TEST_CASE("trained regressor beats the constant-mean predictor at t = 1") {
  const auto& data = toy_subgraphs();
  const std::size_t half = data.size() / 2;
  std::vector<Subgraph> train_set(data.begin(), data.begin() + half);
  std::vector<Subgraph> held(data.begin() + half, data.end());
  auto model = untrained_toy_model(train_set);
  RegressorConfig rc;
  rc.steps = 600;
  rc.seed = 2;
  Regressor reg = train_regressor(train_set, model, rc);
  double mean = 0;
  for (const auto& s : train_set) mean += attribute_value(s.graph, rc.attr) / train_set.size();
  double mae = 0, base = 0;
  auto rng = make_rng(8);
  for (const auto& s : held) {
    auto st = forward_sample(s, 1, model.schedule, model.transition, 20, false, rng);
    const double y = attribute_value(s.graph, rc.attr);
    mae += std::abs(regressor_predict(reg, st) - y);
    base += std::abs(mean - y);
  }
  CHECK(mae < base);
}

TEST_CASE("regressor JSON round trip") {
  const auto& data = toy_subgraphs();
  auto model = untrained_toy_model(data);
  RegressorConfig rc;
  rc.steps = 3;
  rc.arch = RegressorArch::attn;
  Regressor reg = train_regressor(data, model, rc);
  Regressor back = regressor_from_json(regressor_to_json(reg));
  CHECK(back.params == reg.params);
  CHECK(back.y_mean == reg.y_mean);
  CHECK(back.config.arch == RegressorArch::attn);
}

}  // TEST_SUITE
