#include "subdiff/diffusion.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace subdiff {

using Eigen::MatrixXd;

NoiseSchedule NoiseSchedule::cosine(int T) {
  if (T < 0) throw std::invalid_argument("schedule: T must be >= 0");
  constexpr double s = 0.008;
  auto f = [&](double frac) {
    const double c = std::cos(std::numbers::pi / 2.0 * (frac + s) / (1.0 + s));
    return c * c;
  };
  NoiseSchedule out;
  out.T = T;
  out.alpha_bar.resize(static_cast<std::size_t>(T) + 1);
  const double f0 = f(0.0);
  for (int t = 0; t <= T; ++t) {
    const double frac = T == 0 ? 0.0 : static_cast<double>(t) / T;
    out.alpha_bar[static_cast<std::size_t>(t)] = f(frac) / f0;
  }
  out.alpha_bar[0] = 1.0;
  return out;
}

double NoiseSchedule::alpha(int t) const {
  if (t < 1 || t > T) throw std::out_of_range("schedule: t out of range");
  return alpha_bar[static_cast<std::size_t>(t)] / alpha_bar[static_cast<std::size_t>(t) - 1];
}

TransitionKind parse_transition_kind(const std::string& s) {
  if (s == "marginal") return TransitionKind::marginal;
  if (s == "absorbing") return TransitionKind::absorbing;
  throw std::invalid_argument("unknown transition kind '" + s + "' (expected marginal|absorbing)");
}

std::string to_string(TransitionKind k) { return k == TransitionKind::marginal ? "marginal" : "absorbing"; }

TransitionModel TransitionModel::fit(TransitionKind kind, const std::vector<Subgraph>& data, int num_classes) {
  TransitionModel m;
  m.kind = kind;
  if (kind == TransitionKind::absorbing) {
    m.m_edge = {1.0, 0.0};
  } else {
    double pairs = 0.0;
    double edges = 0.0;
    for (const auto& s : data) {
      const double n = static_cast<double>(s.size());
      pairs += n * (n - 1) / 2.0;
      edges += static_cast<double>(s.graph.num_edges());
    }
    const double p = pairs > 0 ? edges / pairs : 0.0;
    m.m_edge = {1.0 - p, p};
  }
  if (num_classes > 0) {
    m.m_node = Eigen::VectorXd::Zero(num_classes);
    double total = 0.0;
    for (const auto& s : data) {
      for (int l : s.graph.labels()) {
        m.m_node(l) += 1.0;
        total += 1.0;
      }
    }
    if (total > 0) {
      m.m_node /= total;
    } else {
      m.m_node.setConstant(1.0 / num_classes);
    }
  }
  return m;
}

Eigen::Matrix2d TransitionModel::edge_kernel(double a) const {
  Eigen::Matrix2d q = a * Eigen::Matrix2d::Identity();
  q.row(0) += (1.0 - a) * m_edge.transpose();
  q.row(1) += (1.0 - a) * m_edge.transpose();
  return q;
}

MatrixXd TransitionModel::node_kernel(double a) const {
  const auto k = m_node.size();
  MatrixXd q = a * MatrixXd::Identity(k, k);
  for (Eigen::Index r = 0; r < k; ++r) q.row(r) += (1.0 - a) * m_node.transpose();
  return q;
}

namespace {

int draw_categorical(const Eigen::VectorXd& p, Rng& rng) {
  double u = uniform01(rng) * p.sum();
  for (Eigen::Index i = 0; i + 1 < p.size(); ++i) {
    if (u < p(i)) return static_cast<int>(i);
    u -= p(i);
  }
  return static_cast<int>(p.size() - 1);
}

}  // namespace

MatrixXd sample_pairs(const MatrixXd& present_prob, Rng& rng) {
  const auto n = present_prob.rows();
  MatrixXd a = MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (uniform01(rng) < present_prob(i, j)) {
        a(i, j) = 1.0;
        a(j, i) = 1.0;
      }
    }
  }
  return a;
}

DiffusionState forward_sample(const Subgraph& s0, int t, const NoiseSchedule& schedule,
                              const TransitionModel& transition, std::size_t n_max, bool use_labels,
                              Rng& rng) {
  if (t < 0 || t > schedule.T) throw std::out_of_range("forward_sample: t out of range");
  const double ab = schedule.alpha_bar[static_cast<std::size_t>(t)];
  const MatrixXd a0 = s0.graph.adjacency_matrix();
  const double base = (1.0 - ab) * transition.m_edge(1);
  // Qbar_t[state0, present] for state0 = absent / present.
  MatrixXd prob = MatrixXd::Constant(a0.rows(), a0.cols(), base) + ab * a0;

  DiffusionState st;
  st.t = t;
  st.A = sample_pairs(prob, rng);
  st.C = s0.context;
  if (use_labels && s0.graph.has_labels()) {
    const MatrixXd q = transition.node_kernel(ab);
    st.labels.reserve(s0.size());
    for (int l : s0.graph.labels()) st.labels.push_back(draw_categorical(q.row(l).transpose(), rng));
  }
  st.Q = local_context(st.A, n_max);
  return st;
}

Eigen::Vector2d posterior_pair(int e_t, const Eigen::Vector2d& p0, int t, const NoiseSchedule& schedule,
                               const TransitionModel& transition) {
  if (std::abs(p0.sum() - 1.0) > 1e-9 || p0.minCoeff() < 0.0) {
    throw std::invalid_argument("posterior: p0_hat row is not a distribution");
  }
  const Eigen::Matrix2d qt = transition.edge_kernel(schedule.alpha(t));
  const Eigen::Matrix2d qbar = transition.edge_kernel(schedule.alpha_bar[static_cast<std::size_t>(t) - 1]);
  Eigen::Vector2d out;
  for (int a = 0; a < 2; ++a) {
    double mix = 0.0;
    for (int e0 = 0; e0 < 2; ++e0) mix += qbar(e0, a) * p0(e0);
    out(a) = qt(a, e_t) * mix;
  }
  if (out.sum() <= 0.0) out = qt.col(e_t);
  return out / out.sum();
}

MatrixXd posterior_edges(const MatrixXd& A_t, const MatrixXd& p0_present, int t, const NoiseSchedule& schedule,
                         const TransitionModel& transition) {
  if (p0_present.minCoeff() < 0.0 || p0_present.maxCoeff() > 1.0) {
    throw std::invalid_argument("posterior: p0_hat outside [0, 1]");
  }
  const Eigen::Matrix2d qt = transition.edge_kernel(schedule.alpha(t));
  const Eigen::Matrix2d qbar = transition.edge_kernel(schedule.alpha_bar[static_cast<std::size_t>(t) - 1]);
  const auto n = A_t.rows();
  MatrixXd out = MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const int et = A_t(i, j) > 0.5 ? 1 : 0;
      const double p1 = p0_present(i, j);
      const double w0 = qt(0, et) * (qbar(0, 0) * (1.0 - p1) + qbar(1, 0) * p1);
      const double w1 = qt(1, et) * (qbar(0, 1) * (1.0 - p1) + qbar(1, 1) * p1);
      double p = 0.0;
      if (w0 + w1 > 0.0) {
        p = w1 / (w0 + w1);
      } else {
        p = qt(1, et) / (qt(0, et) + qt(1, et));
      }
      out(i, j) = p;
      out(j, i) = p;
    }
  }
  return out;
}

MatrixXd posterior_nodes(const std::vector<int>& x_t, const MatrixXd& p0, int t, const NoiseSchedule& schedule,
                         const TransitionModel& transition) {
  const MatrixXd qt = transition.node_kernel(schedule.alpha(t));
  const MatrixXd qbar = transition.node_kernel(schedule.alpha_bar[static_cast<std::size_t>(t) - 1]);
  const auto k = qt.rows();
  MatrixXd out(p0.rows(), k);
  for (Eigen::Index i = 0; i < p0.rows(); ++i) {
    if (std::abs(p0.row(i).sum() - 1.0) > 1e-9) throw std::invalid_argument("posterior: p0_hat row not normalized");
    const int xt = x_t[static_cast<std::size_t>(i)];
    Eigen::RowVectorXd mix = p0.row(i) * qbar;
    Eigen::RowVectorXd w = mix.cwiseProduct(qt.col(xt).transpose());
    if (w.sum() <= 0.0) w = qt.col(xt).transpose();
    out.row(i) = w / w.sum();
  }
  return out;
}

Eigen::RowVectorXd time_embedding(double frac, int dim) {
  Eigen::RowVectorXd e(dim);
  const int half = dim / 2;
  for (int k = 0; k < half; ++k) {
    const double w = std::numbers::pi / 2.0 * std::ldexp(1.0, k);
    e(2 * k) = std::sin(frac * w);
    e(2 * k + 1) = std::cos(frac * w);
  }
  if (dim % 2 == 1) e(dim - 1) = frac;
  return e;
}

namespace {

MatrixXd glorot(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(rows)));
  MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  }
  return m;
}

std::string layer_key(int l, const char* name) { return "layer" + std::to_string(l) + "." + name; }

int input_width(const DenoiserConfig& cfg) {
  return std::max(cfg.num_classes, 1) + kLocalFeatureCount + cfg.time_dim;
}

}  // namespace

ParamSet init_denoiser(const DenoiserConfig& cfg, std::uint64_t seed) {
  Rng rng = make_rng(seed, 0xde7015e);
  const int h = cfg.hidden;
  const int ke = cfg.edge_channels;
  const int dp = cfg.pair_dim;
  ParamSet p;
  p["in.W"] = glorot(input_width(cfg), h, rng);
  p["in.b"] = MatrixXd::Zero(1, h);
  p["ctx.P0"] = glorot(cfg.context_dim, h, rng);
  p["edge.init"] = glorot(2, ke, rng);
  for (int l = 0; l < cfg.layers; ++l) {
    p[layer_key(l, "Wmsg")] = glorot(h, ke * h, rng);
    p[layer_key(l, "Wself")] = glorot(h, h, rng);
    p[layer_key(l, "b")] = MatrixXd::Zero(1, h);
    p[layer_key(l, "P")] = glorot(cfg.context_dim, h, rng);
    p[layer_key(l, "Wu")] = glorot(h, ke * dp, rng);
    p[layer_key(l, "Wv")] = glorot(h, ke * dp, rng);
    p[layer_key(l, "mix")] = glorot(ke, ke, rng);
    p[layer_key(l, "eb")] = MatrixXd::Zero(1, ke);
  }
  p["out.edge"] = glorot(ke, 2, rng);
  p["out.edge_b"] = MatrixXd::Zero(1, 2);
  if (cfg.num_classes > 0) {
    p["out.node"] = glorot(h, cfg.num_classes, rng);
    p["out.node_b"] = MatrixXd::Zero(1, cfg.num_classes);
  }
  return p;
}

DenoiserOutput denoiser_forward(ad::Tape& tape, const std::map<std::string, ad::Var>& vars,
                                const DenoiserConfig& cfg, const DiffusionState& state, int T) {
  using namespace ad;
  auto P = [&](const std::string& name) {
    auto it = vars.find(name);
    if (it == vars.end()) throw std::invalid_argument("denoiser: missing parameter " + name);
    return it->second;
  };
  const auto n = static_cast<Eigen::Index>(state.size());
  const int h = cfg.hidden;
  const int ke = cfg.edge_channels;
  const int dp = cfg.pair_dim;
  if (state.C.rows() != n || state.C.cols() != cfg.context_dim) {
    throw std::invalid_argument("denoiser: context shape " + std::to_string(state.C.rows()) + "x" +
                                std::to_string(state.C.cols()) + " does not match model (" +
                                std::to_string(cfg.context_dim) + " columns)");
  }
  if (state.Q.rows() != n || state.Q.cols() != kLocalFeatureCount) {
    throw std::invalid_argument("denoiser: local context not computed for this state");
  }

  const int kx = std::max(cfg.num_classes, 1);
  MatrixXd feat = MatrixXd::Zero(n, input_width(cfg));
  if (cfg.num_classes > 0) {
    if (static_cast<Eigen::Index>(state.labels.size()) != n) throw std::invalid_argument("denoiser: labels missing");
    for (Eigen::Index i = 0; i < n; ++i) feat(i, state.labels[static_cast<std::size_t>(i)]) = 1.0;
  } else {
    feat.col(0).setOnes();
  }
  feat.middleCols(kx, kLocalFeatureCount) = state.Q;
  const double frac = T > 0 ? static_cast<double>(state.t) / T : 0.0;
  feat.rightCols(cfg.time_dim) = time_embedding(frac, cfg.time_dim).replicate(n, 1);

  const Var x = tape.constant(std::move(feat));
  const Var c = tape.constant(state.C);
  const MatrixXd offdiag = MatrixXd::Ones(n, n) - MatrixXd::Identity(n, n);
  const Var ones = tape.constant(MatrixXd::Ones(n, n));
  const Var a_present = tape.constant(state.A);
  const Var a_absent = tape.constant(offdiag - state.A);

  Var node = silu(add_row(x * P("in.W"), P("in.b"))) + c * P("ctx.P0");

  std::vector<Var> edge(static_cast<std::size_t>(ke));
  for (int ch = 0; ch < ke; ++ch) {
    edge[static_cast<std::size_t>(ch)] = scalar_mul(a_absent, element(P("edge.init"), 0, ch)) +
                                         scalar_mul(a_present, element(P("edge.init"), 1, ch));
  }

  const double msg_scale = 1.0 / static_cast<double>(std::max<Eigen::Index>(1, n - 1));
  const double pair_scale = 1.0 / std::sqrt(static_cast<double>(dp));
  for (int l = 0; l < cfg.layers; ++l) {
    const Var hw = node * P(layer_key(l, "Wmsg"));
    Var msg = edge[0] * cols(hw, 0, h);
    for (int ch = 1; ch < ke; ++ch) msg = msg + edge[static_cast<std::size_t>(ch)] * cols(hw, ch * h, h);
    node = silu(add_row(node * P(layer_key(l, "Wself")) + msg_scale * msg, P(layer_key(l, "b")))) +
           c * P(layer_key(l, "P"));

    const Var u = node * P(layer_key(l, "Wu"));
    const Var v = node * P(layer_key(l, "Wv"));
    const Var mix = P(layer_key(l, "mix"));
    const Var eb = P(layer_key(l, "eb"));
    std::vector<Var> next(static_cast<std::size_t>(ke));
    for (int ch = 0; ch < ke; ++ch) {
      const Var bil = cols(u, ch * dp, dp) * transpose(cols(v, ch * dp, dp));
      Var pre = pair_scale * (bil + transpose(bil)) + scalar_mul(ones, element(eb, 0, ch));
      for (int src = 0; src < ke; ++src) {
        pre = pre + scalar_mul(edge[static_cast<std::size_t>(src)], element(mix, src, ch));
      }
      next[static_cast<std::size_t>(ch)] = cmul(tanh(pre), offdiag);
    }
    edge = std::move(next);
  }

  DenoiserOutput out;
  const Var w = P("out.edge");
  const Var wb = P("out.edge_b");
  Var z[2];
  for (int s = 0; s < 2; ++s) {
    Var acc = scalar_mul(ones, element(wb, 0, s));
    for (int ch = 0; ch < ke; ++ch) acc = acc + scalar_mul(edge[static_cast<std::size_t>(ch)], element(w, ch, s));
    z[s] = 0.5 * (acc + transpose(acc));
  }
  out.edge0 = z[0];
  out.edge1 = z[1];
  if (cfg.num_classes > 0) out.node = add_row(node * P("out.node"), P("out.node_b"));
  return out;
}

namespace {

std::map<std::string, ad::Var> bind(ad::Tape& tape, const ParamSet& params, bool trainable) {
  std::map<std::string, ad::Var> vars;
  for (const auto& [name, value] : params) {
    vars.emplace(name, trainable ? tape.variable(value) : tape.constant(value));
  }
  return vars;
}

}  // namespace

Logits denoiser_apply(const ParamSet& params, const DenoiserConfig& cfg, const DiffusionState& state, int T) {
  ad::Tape tape;
  auto vars = bind(tape, params, false);
  auto out = denoiser_forward(tape, vars, cfg, state, T);
  Logits l;
  l.edge0 = out.edge0.value();
  l.edge1 = out.edge1.value();
  if (cfg.num_classes > 0) l.node = out.node.value();
  return l;
}

ad::Var denoiser_loss(const DenoiserOutput& out, const Subgraph& clean, bool use_labels) {
  const auto n = static_cast<Eigen::Index>(clean.size());
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  MatrixXd weight = MatrixXd::Zero(n, n);
  if (pairs > 0) weight.triangularView<Eigen::StrictlyUpper>().setConstant(1.0 / pairs);
  ad::Var loss = ad::binary_ce(out.edge0, out.edge1, clean.graph.adjacency_matrix(), weight);
  if (use_labels && out.node.tape != nullptr && clean.graph.has_labels()) {
    loss = loss + ad::softmax_ce(out.node, clean.graph.labels(), 1.0 / static_cast<double>(n));
  }
  return loss;
}

double loss_and_grad(const ParamSet& params, const DenoiserConfig& cfg, const std::vector<Example>& batch, int T,
                     bool use_labels, ParamSet* grad) {
  if (batch.empty()) throw std::invalid_argument("loss: empty batch");
  ad::Tape tape;
  auto vars = bind(tape, params, grad != nullptr);
  ad::Var total;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    auto out = denoiser_forward(tape, vars, cfg, batch[b].noisy, T);
    auto l = denoiser_loss(out, *batch[b].clean, use_labels);
    total = b == 0 ? l : total + l;
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

void Adam::update(ParamSet& params, const ParamSet& grad) {
  ++step;
  double scale = 1.0;
  if (clip > 0) {
    double sq = 0.0;
    for (const auto& [name, g] : grad) sq += g.squaredNorm();
    const double norm = std::sqrt(sq);
    if (norm > clip) scale = clip / norm;
  }
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
  for (auto& [name, p] : params) {
    const MatrixXd g = scale * grad.at(name);
    auto& mm = m[name];
    auto& vv = v[name];
    if (mm.size() == 0) {
      mm = MatrixXd::Zero(p.rows(), p.cols());
      vv = MatrixXd::Zero(p.rows(), p.cols());
    }
    mm = beta1 * mm + (1.0 - beta1) * g;
    vv = beta2 * vv + (1.0 - beta2) * g.cwiseProduct(g);
    p.array() -= lr * (mm.array() / c1) / ((vv.array() / c2).sqrt() + eps);
  }
}

DiffusionModel train(const std::vector<Subgraph>& data, const TrainConfig& config, const LossCallback& on_step) {
  if (data.empty()) throw std::invalid_argument("train: no training subgraphs");
  DiffusionModel model;
  model.config = config;
  const bool labels = config.use_labels && config.net.num_classes > 0;
  model.config.use_labels = labels;
  if (!labels) model.config.net.num_classes = 0;
  for (const auto& s : data) {
    if (s.size() > config.net.n_max) throw std::invalid_argument("train: subgraph exceeds n_max");
    if (s.context.cols() != config.net.context_dim) throw std::invalid_argument("train: context width mismatch");
    if (labels && !s.graph.has_labels()) throw std::invalid_argument("train: labels requested but missing");
  }
  model.schedule = NoiseSchedule::cosine(config.T);
  model.transition = TransitionModel::fit(config.transition, data, model.config.net.num_classes);
  model.params = init_denoiser(model.config.net, config.seed);
  model.histograms = build_histograms(data);
  if (config.T < 1) return model;

  Adam adam;
  adam.lr = config.lr;
  Rng rng = make_rng(config.seed, 0x7a1);
  std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
  std::uniform_int_distribution<int> pick_t(1, config.T);
  ParamSet grad;
  for (long step = 0; step < config.steps; ++step) {
    std::vector<Example> batch;
    std::vector<int> ts;
    for (int b = 0; b < config.batch; ++b) {
      const Subgraph& s = data[pick(rng)];
      const int t = pick_t(rng);
      ts.push_back(t);
      batch.push_back({&s, forward_sample(s, t, model.schedule, model.transition, config.net.n_max, labels, rng)});
    }
    const double loss = loss_and_grad(model.params, model.config.net, batch, config.T, labels, &grad);
    if (!std::isfinite(loss)) {
      std::ostringstream msg;
      msg << "training diverged at step " << step << ": loss=" << loss << ", t=[";
      for (std::size_t i = 0; i < ts.size(); ++i) msg << (i ? "," : "") << ts[i];
      msg << "], lr=" << config.lr;
      throw TrainingDiverged(msg.str());
    }
    adam.update(model.params, grad);
    if (on_step) on_step(step, loss);
  }
  return model;
}

DiffusionState sample_prior(const TransitionModel& transition, std::size_t n, bool use_labels, Rng& rng) {
  DiffusionState st;
  const auto nn = static_cast<Eigen::Index>(n);
  st.A = sample_pairs(MatrixXd::Constant(nn, nn, transition.m_edge(1)), rng);
  if (use_labels && transition.m_node.size() > 0) {
    for (std::size_t i = 0; i < n; ++i) st.labels.push_back(draw_categorical(transition.m_node, rng));
  }
  return st;
}

DiffusionState reverse_sample(const DiffusionModel& model, std::size_t n, const MatrixXd& C, Rng& rng,
                              const ReverseOptions& options) {
  if (n < 2) throw std::invalid_argument("reverse_sample: need at least 2 nodes");
  if (C.rows() != static_cast<Eigen::Index>(n)) throw std::invalid_argument("reverse_sample: context rows != n");
  const bool labels = model.config.use_labels;
  const auto& net = model.config.net;
  const int T = model.schedule.T;
  DiffusionState st = sample_prior(model.transition, n, labels, rng);
  st.t = T;
  st.C = C;
  if (options.after_step) options.after_step(st);
  for (int t = T; t >= 1; --t) {
    st.t = t;
    st.Q = local_context(st.A, net.n_max);
    const Logits logits = denoiser_apply(model.params, net, st, T);
    const MatrixXd p0 = (1.0 + (logits.edge0 - logits.edge1).array().exp()).inverse().matrix();
    MatrixXd prob = posterior_edges(st.A, p0, t, model.schedule, model.transition);
    if (options.guidance) options.guidance(st, prob);
    MatrixXd next = sample_pairs(prob, rng);
    if (labels) {
      MatrixXd p0n(logits.node.rows(), logits.node.cols());
      for (Eigen::Index i = 0; i < p0n.rows(); ++i) {
        Eigen::RowVectorXd e = (logits.node.row(i).array() - logits.node.row(i).maxCoeff()).exp().matrix();
        p0n.row(i) = e / e.sum();
      }
      const MatrixXd pn = posterior_nodes(st.labels, p0n, t, model.schedule, model.transition);
      for (Eigen::Index i = 0; i < pn.rows(); ++i) {
        st.labels[static_cast<std::size_t>(i)] = draw_categorical(pn.row(i).transpose(), rng);
      }
    }
    st.A = std::move(next);
    st.t = t - 1;
    if (options.after_step) options.after_step(st);
  }
  st.Q = local_context(st.A, net.n_max);
  return st;
}

Graph state_graph(const DiffusionState& s, int num_classes) {
  Graph g = graph_from_adjacency(s.A);
  if (!s.labels.empty()) {
    int k = num_classes;
    for (int l : s.labels) k = std::max(k, l + 1);
    g.set_labels(s.labels, k);
  }
  return g;
}

}  // namespace subdiff
