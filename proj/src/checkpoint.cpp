#include "subdiff/checkpoint.hpp"

#include <algorithm>
#include <stdexcept>

#include "subdiff/io.hpp"

namespace subdiff {

using nlohmann::json;

namespace {

constexpr const char* kModelFormat = "subdiff-model/1";

json matrix_to_json(const Eigen::MatrixXd& m) {
  std::vector<double> data(m.data(), m.data() + m.size());
  return json{{"shape", {m.rows(), m.cols()}}, {"data", data}};
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto rows = j.at("shape").at(0).get<Eigen::Index>();
  const auto cols = j.at("shape").at(1).get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw std::invalid_argument("matrix data length does not match its shape");
  }
  return Eigen::Map<const Eigen::MatrixXd>(data.data(), rows, cols);
}

}  // namespace

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument(where + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
    if (!known) throw std::invalid_argument(where + ": unknown key '" + key + "'");
  }
}

json params_to_json(const ParamSet& params) {
  json j = json::object();
  for (const auto& [name, m] : params) j[name] = matrix_to_json(m);
  return j;
}

ParamSet params_from_json(const json& j) {
  ParamSet p;
  for (const auto& [name, value] : j.items()) p[name] = matrix_from_json(value);
  return p;
}

json histograms_to_json(const Histograms& h) {
  json global = json::array();
  for (const auto& [row, entry] : h.global) {
    global.push_back({{"row", row}, {"count", entry.count}, {"node", entry.node}});
  }
  json size = json::array();
  for (const auto& [n, count] : h.size) size.push_back({n, count});
  return {{"global", global}, {"size", size}};
}

Histograms histograms_from_json(const json& j) {
  Histograms h;
  for (const auto& e : j.at("global")) {
    auto& entry = h.global[e.at("row").get<ContextRow>()];
    entry.count = e.at("count").get<std::size_t>();
    entry.node = e.at("node").get<NodeId>();
  }
  for (const auto& e : j.at("size")) h.size[e.at(0).get<std::size_t>()] = e.at(1).get<std::size_t>();
  return h;
}

json train_config_to_json(const TrainConfig& c) {
  return {
      {"T", c.T},
      {"steps", c.steps},
      {"batch", c.batch},
      {"lr", c.lr},
      {"seed", c.seed},
      {"transition", to_string(c.transition)},
      {"use_labels", c.use_labels},
      {"layers", c.net.layers},
      {"hidden", c.net.hidden},
      {"edge_channels", c.net.edge_channels},
      {"pair_dim", c.net.pair_dim},
      {"time_dim", c.net.time_dim},
      {"context_dim", c.net.context_dim},
      {"num_classes", c.net.num_classes},
      {"n_max", c.net.n_max},
  };
}

TrainConfig train_config_from_json(const json& j) {
  reject_unknown_keys(j,
                      {"T", "steps", "batch", "lr", "seed", "transition", "use_labels", "layers", "hidden",
                       "edge_channels", "pair_dim", "time_dim", "context_dim", "num_classes", "n_max"},
                      "diffusion config");
  TrainConfig c;
  c.T = j.value("T", c.T);
  c.steps = j.value("steps", c.steps);
  c.batch = j.value("batch", c.batch);
  c.lr = j.value("lr", c.lr);
  c.seed = j.value("seed", c.seed);
  if (j.contains("transition")) c.transition = parse_transition_kind(j.at("transition").get<std::string>());
  c.use_labels = j.value("use_labels", c.use_labels);
  c.net.layers = j.value("layers", c.net.layers);
  c.net.hidden = j.value("hidden", c.net.hidden);
  c.net.edge_channels = j.value("edge_channels", c.net.edge_channels);
  c.net.pair_dim = j.value("pair_dim", c.net.pair_dim);
  c.net.time_dim = j.value("time_dim", c.net.time_dim);
  c.net.context_dim = j.value("context_dim", c.net.context_dim);
  c.net.num_classes = j.value("num_classes", c.net.num_classes);
  c.net.n_max = j.value("n_max", c.net.n_max);
  if (c.T < 0 || c.steps < 0 || c.batch < 1 || c.net.layers < 0 || c.net.hidden < 1 || c.net.edge_channels < 1 ||
      c.net.pair_dim < 1 || c.net.time_dim < 1 || c.net.n_max < 2 || !(c.lr > 0)) {
    throw std::invalid_argument("diffusion config: parameter out of range");
  }
  return c;
}

json model_to_json(const DiffusionModel& m) {
  std::vector<double> m_node(m.transition.m_node.data(), m.transition.m_node.data() + m.transition.m_node.size());
  return {
      {"format", kModelFormat},
      {"config", train_config_to_json(m.config)},
      {"transition",
       {{"kind", to_string(m.transition.kind)},
        {"m_edge", {m.transition.m_edge(0), m.transition.m_edge(1)}},
        {"m_node", m_node}}},
      {"params", params_to_json(m.params)},
      {"histograms", histograms_to_json(m.histograms)},
  };
}

DiffusionModel model_from_json(const json& j) {
  if (j.value("format", std::string{}) != kModelFormat) {
    throw std::invalid_argument("not a model checkpoint (expected format " + std::string(kModelFormat) + ")");
  }
  DiffusionModel m;
  m.config = train_config_from_json(j.at("config"));
  m.schedule = NoiseSchedule::cosine(m.config.T);
  const auto& tr = j.at("transition");
  m.transition.kind = parse_transition_kind(tr.at("kind").get<std::string>());
  m.transition.m_edge = {tr.at("m_edge").at(0).get<double>(), tr.at("m_edge").at(1).get<double>()};
  const auto m_node = tr.at("m_node").get<std::vector<double>>();
  m.transition.m_node = Eigen::Map<const Eigen::VectorXd>(m_node.data(), static_cast<Eigen::Index>(m_node.size()));
  m.params = params_from_json(j.at("params"));
  m.histograms = histograms_from_json(j.at("histograms"));
  const auto expected = init_denoiser(m.config.net, 0);
  for (const auto& [name, value] : expected) {
    auto it = m.params.find(name);
    if (it == m.params.end() || it->second.rows() != value.rows() || it->second.cols() != value.cols()) {
      throw std::invalid_argument("checkpoint parameter '" + name + "' missing or misshapen");
    }
  }
  return m;
}

void save_model(const std::filesystem::path& path, const DiffusionModel& m) {
  write_file_atomic(path, model_to_json(m).dump());
}

DiffusionModel load_model(const std::filesystem::path& path) {
  try {
    return model_from_json(json::parse(read_file(path)));
  } catch (const json::exception& e) {
    throw std::invalid_argument("cannot read model " + path.string() + ": " + e.what());
  }
}

}  // namespace subdiff
