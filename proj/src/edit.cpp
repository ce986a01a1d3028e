#include "subdiff/edit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "subdiff/checkpoint.hpp"
#include "subdiff/stats.hpp"

namespace subdiff {

using Eigen::MatrixXd;
using nlohmann::json;

EditTask parse_edit_task(const std::string& s) {
  if (s == "expand") return EditTask::expand;
  if (s == "denoise") return EditTask::denoise;
  if (s == "style") return EditTask::style;
  throw std::invalid_argument("unknown edit task '" + s + "' (expected expand|denoise|style)");
}

std::string to_string(EditTask t) {
  switch (t) {
    case EditTask::expand: return "expand";
    case EditTask::denoise: return "denoise";
    case EditTask::style: return "style";
  }
  return "?";
}

StyleAttr parse_style_attr(const std::string& s) {
  if (s == "sum_degree") return StyleAttr::sum_degree;
  if (s == "max_degree") return StyleAttr::max_degree;
  if (s == "triangles") return StyleAttr::triangles;
  throw std::invalid_argument("unknown style attribute '" + s + "' (expected sum_degree|max_degree|triangles)");
}

std::string to_string(StyleAttr a) {
  switch (a) {
    case StyleAttr::sum_degree: return "sum_degree";
    case StyleAttr::max_degree: return "max_degree";
    case StyleAttr::triangles: return "triangles";
  }
  return "?";
}

RegressorArch parse_regressor_arch(const std::string& s) {
  if (s == "mp") return RegressorArch::mp;
  if (s == "mp-sum") return RegressorArch::mp_sum;
  if (s == "attn") return RegressorArch::attn;
  throw std::invalid_argument("unknown regressor architecture '" + s + "' (expected mp|mp-sum|attn)");
}

std::string to_string(RegressorArch a) {
  switch (a) {
    case RegressorArch::mp: return "mp";
    case RegressorArch::mp_sum: return "mp-sum";
    case RegressorArch::attn: return "attn";
  }
  return "?";
}

double attribute_value(const Graph& g, StyleAttr attr) {
  switch (attr) {
    case StyleAttr::sum_degree: return 2.0 * static_cast<double>(g.num_edges());
    case StyleAttr::max_degree: {
      std::size_t best = 0;
      for (NodeId v = 0; v < g.num_nodes(); ++v) best = std::max(best, g.degree(v));
      return static_cast<double>(best);
    }
    case StyleAttr::triangles: return static_cast<double>(count_triangles(g));
  }
  return 0.0;
}

namespace {

MatrixXd normal_init(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(rows)));
  MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  }
  return m;
}

std::string key(int l, const char* name) { return "reg" + std::to_string(l) + "." + name; }

int regressor_input_width(const RegressorConfig& cfg) { return 1 + kLocalFeatureCount + cfg.time_dim; }

std::map<std::string, ad::Var> bind_params(ad::Tape& tape, const ParamSet& params, bool trainable) {
  std::map<std::string, ad::Var> vars;
  for (const auto& [name, value] : params) vars.emplace(name, trainable ? tape.variable(value) : tape.constant(value));
  return vars;
}

}  // namespace

ParamSet init_regressor(const RegressorConfig& cfg, std::uint64_t seed) {
  Rng rng = make_rng(seed, 0x4e6);
  const int h = cfg.hidden;
  ParamSet p;
  p["in.W"] = normal_init(regressor_input_width(cfg), h, rng);
  p["in.b"] = MatrixXd::Zero(1, h);
  for (int l = 0; l < cfg.layers; ++l) {
    p[key(l, "W")] = normal_init(h, h, rng);
    p[key(l, "b")] = MatrixXd::Zero(1, h);
    if (cfg.arch == RegressorArch::attn) {
      p[key(l, "Wq")] = normal_init(h, h, rng);
      p[key(l, "Wk")] = normal_init(h, h, rng);
      p[key(l, "Wv")] = normal_init(h, h, rng);
      p[key(l, "beta")] = MatrixXd::Constant(1, 1, 1.0);
    }
  }
  p["out.w"] = normal_init(h, 1, rng) * 0.1;
  p["out.b"] = MatrixXd::Zero(1, 1);
  return p;
}

ad::Var regressor_forward(ad::Tape& tape, const std::map<std::string, ad::Var>& vars, const RegressorConfig& cfg,
                          ad::Var a, const MatrixXd& Q, int t, int T) {
  using namespace ad;
  auto P = [&](const std::string& name) {
    auto it = vars.find(name);
    if (it == vars.end()) throw std::invalid_argument("regressor: missing parameter " + name);
    return it->second;
  };
  const auto n = a.rows();
  if (Q.rows() != n) throw std::invalid_argument("regressor: local context rows != node count");
  MatrixXd fixed(n, kLocalFeatureCount + cfg.time_dim);
  fixed.leftCols(kLocalFeatureCount) = Q;
  const double frac = T > 0 ? static_cast<double>(t) / T : 0.0;
  fixed.rightCols(cfg.time_dim) = time_embedding(frac, cfg.time_dim).replicate(n, 1);
  // The degree column is recomputed from `a` so guidance gradients reach it.
  const double deg_scale = 1.0 / static_cast<double>(std::max<Eigen::Index>(1, n - 1));
  const Var x = hcat(deg_scale * row_sums(a), tape.constant(std::move(fixed)));

  Var h = silu(add_row(x * P("in.W"), P("in.b")));
  const MatrixXd eye = MatrixXd::Identity(n, n);
  const double att_scale = 1.0 / std::sqrt(static_cast<double>(cfg.hidden));
  for (int l = 0; l < cfg.layers; ++l) {
    Var agg;
    switch (cfg.arch) {
      case RegressorArch::mp: {
        const Var a_hat = add_const(a, eye);
        agg = div_rows(a_hat * h, row_sums(a_hat));
        break;
      }
      case RegressorArch::mp_sum:
        agg = h + a * h;
        break;
      case RegressorArch::attn: {
        const Var q = h * P(key(l, "Wq"));
        const Var k = h * P(key(l, "Wk"));
        const Var v = h * P(key(l, "Wv"));
        const Var scores = att_scale * (q * transpose(k)) + scalar_mul(a, P(key(l, "beta")));
        agg = h + row_softmax(scores) * v;
        break;
      }
    }
    h = silu(add_row(agg * P(key(l, "W")), P(key(l, "b"))));
  }
  return col_sums(h) * P("out.w") + P("out.b");
}

double regressor_predict(const Regressor& reg, const DiffusionState& state) {
  ad::Tape tape;
  auto vars = bind_params(tape, reg.params, false);
  const ad::Var a = tape.constant(state.A);
  const ad::Var y = regressor_forward(tape, vars, reg.config, a, state.Q, state.t, reg.T);
  return reg.y_mean + reg.y_std * y.value()(0, 0);
}

double regressor_loss_and_grad(const Regressor& reg, const std::vector<Example>& batch, ParamSet* grad) {
  if (batch.empty()) throw std::invalid_argument("regressor loss: empty batch");
  ad::Tape tape;
  auto vars = bind_params(tape, reg.params, grad != nullptr);
  ad::Var total;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto& ex = batch[b];
    const ad::Var a = tape.constant(ex.noisy.A);
    const ad::Var y = regressor_forward(tape, vars, reg.config, a, ex.noisy.Q, ex.noisy.t, reg.T);
    const double target = (attribute_value(ex.clean->graph, reg.config.attr) - reg.y_mean) / reg.y_std;
    const ad::Var err = ad::add_const(y, MatrixXd::Constant(1, 1, -target));
    const ad::Var sq = ad::cmul(err, err);
    total = b == 0 ? sq : total + sq;
  }
  total = (1.0 / static_cast<double>(batch.size())) * total;
  const double value = total.value()(0, 0);
  if (grad != nullptr) {
    tape.backward(total);
    grad->clear();
    for (const auto& [name, var] : vars) (*grad)[name] = tape.grad(var);
  }
  return value;
}

Regressor train_regressor(const std::vector<Subgraph>& data, const DiffusionModel& model, const RegressorConfig& cfg,
                          const LossCallback& on_step) {
  if (data.empty()) throw std::invalid_argument("train_regressor: no training subgraphs");
  Regressor reg;
  reg.config = cfg;
  reg.T = model.schedule.T;
  reg.n_max = model.config.net.n_max;
  double sum = 0.0;
  double sq = 0.0;
  for (const auto& s : data) {
    const double y = attribute_value(s.graph, cfg.attr);
    sum += y;
    sq += y * y;
  }
  const double n = static_cast<double>(data.size());
  reg.y_mean = sum / n;
  reg.y_std = std::sqrt(std::max(sq / n - reg.y_mean * reg.y_mean, 0.0));
  if (reg.y_std < 1e-9) reg.y_std = 1.0;
  reg.params = init_regressor(cfg, cfg.seed);
  if (reg.T < 1) return reg;

  Adam adam;
  adam.lr = cfg.lr;
  Rng rng = make_rng(cfg.seed, 0x4e67);
  std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
  std::uniform_int_distribution<int> pick_t(1, reg.T);
  ParamSet grad;
  for (long step = 0; step < cfg.steps; ++step) {
    std::vector<Example> batch;
    for (int b = 0; b < cfg.batch; ++b) {
      const Subgraph& s = data[pick(rng)];
      const int t = pick_t(rng);
      batch.push_back({&s, forward_sample(s, t, model.schedule, model.transition, reg.n_max, false, rng)});
    }
    const double loss = regressor_loss_and_grad(reg, batch, &grad);
    if (!std::isfinite(loss)) {
      throw TrainingDiverged("regressor training diverged at step " + std::to_string(step) +
                             " (loss=" + std::to_string(loss) + ", lr=" + std::to_string(cfg.lr) + ")");
    }
    adam.update(reg.params, grad);
    if (on_step) on_step(step, loss);
  }
  return reg;
}

MatrixXd guidance_gradient(const Regressor& reg, const DiffusionState& state, double target) {
  ad::Tape tape;
  auto vars = bind_params(tape, reg.params, false);
  const ad::Var a = tape.variable(state.A);
  const ad::Var y = regressor_forward(tape, vars, reg.config, a, state.Q, state.t, reg.T);
  const double z = (target - reg.y_mean) / reg.y_std;
  const ad::Var err = ad::add_const(y, MatrixXd::Constant(1, 1, -z));
  tape.backward(ad::cmul(err, err));
  MatrixXd g = tape.grad(a);
  MatrixXd sym = g + g.transpose();
  sym.diagonal().setZero();
  return sym;
}

void apply_guidance(MatrixXd& present_prob, const MatrixXd& g, double lambda) {
  const auto n = present_prob.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double p = present_prob(i, j);
      double out = p;
      if (p > 0.0 && p < 1.0) {
        // Only the present state carries a gradient; the absent state's factor is 1.
        const double logit = std::log(p) - std::log1p(-p) - lambda * g(i, j);
        out = logit >= 0 ? 1.0 / (1.0 + std::exp(-logit)) : std::exp(logit) / (1.0 + std::exp(logit));
      }
      present_prob(i, j) = out;
      present_prob(j, i) = out;
    }
  }
}

json regressor_to_json(const Regressor& r) {
  return {
      {"format", "subdiff-regressor/1"},
      {"arch", to_string(r.config.arch)},
      {"attr", to_string(r.config.attr)},
      {"layers", r.config.layers},
      {"hidden", r.config.hidden},
      {"time_dim", r.config.time_dim},
      {"steps", r.config.steps},
      {"batch", r.config.batch},
      {"lr", r.config.lr},
      {"seed", r.config.seed},
      {"T", r.T},
      {"n_max", r.n_max},
      {"y_mean", r.y_mean},
      {"y_std", r.y_std},
      {"params", params_to_json(r.params)},
  };
}

Regressor regressor_from_json(const json& j) {
  if (j.value("format", std::string{}) != "subdiff-regressor/1") {
    throw std::invalid_argument("not a regressor checkpoint");
  }
  Regressor r;
  r.config.arch = parse_regressor_arch(j.at("arch").get<std::string>());
  r.config.attr = parse_style_attr(j.at("attr").get<std::string>());
  r.config.layers = j.at("layers").get<int>();
  r.config.hidden = j.at("hidden").get<int>();
  r.config.time_dim = j.at("time_dim").get<int>();
  r.config.steps = j.at("steps").get<long>();
  r.config.batch = j.at("batch").get<int>();
  r.config.lr = j.at("lr").get<double>();
  r.config.seed = j.at("seed").get<std::uint64_t>();
  r.T = j.at("T").get<int>();
  r.n_max = j.at("n_max").get<std::size_t>();
  r.y_mean = j.at("y_mean").get<double>();
  r.y_std = j.at("y_std").get<double>();
  r.params = params_from_json(j.at("params"));
  return r;
}

namespace {

void check_request(const EditRequest& req, const DiffusionModel& model) {
  if (req.R < 1) throw std::invalid_argument("edit: R must be >= 1");
  if (req.observed.size() < 2) throw std::invalid_argument("edit: observed subgraph needs at least 2 nodes");
  if (req.observed.context.rows() != static_cast<Eigen::Index>(req.observed.size()) ||
      req.observed.context.cols() != model.config.net.context_dim) {
    throw std::invalid_argument("edit: observed context is " + std::to_string(req.observed.context.rows()) + "x" +
                                std::to_string(req.observed.context.cols()) + ", model expects " +
                                std::to_string(model.config.net.context_dim) + " columns");
  }
  if (req.observed.size() > model.config.net.n_max) {
    throw std::invalid_argument("edit: observed subgraph has " + std::to_string(req.observed.size()) +
                                " nodes, model n_max is " + std::to_string(model.config.net.n_max));
  }
}

Graph finish(const DiffusionState& st, const DiffusionModel& model) {
  return state_graph(st, model.config.net.num_classes);
}

}  // namespace

std::vector<Graph> expand(const EditRequest& req, const DiffusionModel& model, const EditObserver& observe) {
  check_request(req, model);
  const MatrixXd a_obs = req.observed.graph.adjacency_matrix();
  const bool force_labels = model.config.use_labels && req.observed.graph.has_labels();
  std::vector<Graph> out;
  for (int r = 0; r < req.R; ++r) {
    Rng rng = make_rng(req.seed, static_cast<std::uint64_t>(r));
    ReverseOptions opts;
    opts.after_step = [&](DiffusionState& st) {
      st.A = (MatrixXd::Ones(a_obs.rows(), a_obs.cols()) - a_obs).cwiseProduct(st.A) + a_obs;
      if (force_labels) st.labels = req.observed.graph.labels();
      if (observe) observe(r, st);
    };
    out.push_back(finish(reverse_sample(model, req.observed.size(), req.observed.context, rng, opts), model));
  }
  return out;
}

std::vector<Graph> denoise(const EditRequest& req, const DiffusionModel& model, const EditObserver& observe) {
  check_request(req, model);
  const MatrixXd a_obs = req.observed.graph.adjacency_matrix();
  std::vector<Graph> out;
  for (int r = 0; r < req.R; ++r) {
    Rng rng = make_rng(req.seed, static_cast<std::uint64_t>(r));
    ReverseOptions opts;
    opts.after_step = [&](DiffusionState& st) {
      st.A = a_obs.cwiseProduct(st.A);
      if (observe) observe(r, st);
    };
    out.push_back(finish(reverse_sample(model, req.observed.size(), req.observed.context, rng, opts), model));
  }
  return out;
}

std::vector<Graph> style_transfer(const EditRequest& req, const DiffusionModel& model, const EditObserver& observe) {
  check_request(req, model);
  if (req.regressor == nullptr) throw std::invalid_argument("style transfer needs a regressor");
  if (req.lambda < 0) throw std::invalid_argument("style transfer: lambda must be >= 0");
  if (req.regressor->T != model.schedule.T) {
    throw std::invalid_argument("style transfer: regressor T differs from the model's");
  }
  std::vector<Graph> out;
  for (int r = 0; r < req.R; ++r) {
    Rng rng = make_rng(req.seed, static_cast<std::uint64_t>(r));
    ReverseOptions opts;
    opts.guidance = [&](const DiffusionState& st, MatrixXd& prob) {
      apply_guidance(prob, guidance_gradient(*req.regressor, st, req.target), req.lambda);
    };
    if (observe) opts.after_step = [&](DiffusionState& st) { observe(r, st); };
    out.push_back(finish(reverse_sample(model, req.observed.size(), req.observed.context, rng, opts), model));
  }
  return out;
}

std::vector<Graph> run_edit(const EditRequest& req, const DiffusionModel& model, const EditObserver& observe) {
  switch (req.task) {
    case EditTask::expand: return expand(req, model, observe);
    case EditTask::denoise: return denoise(req, model, observe);
    case EditTask::style: return style_transfer(req, model, observe);
  }
  throw std::invalid_argument("edit: unknown task");
}

}  // namespace subdiff
