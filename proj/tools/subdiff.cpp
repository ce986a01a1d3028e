// subdiff: batch CLI over the library. Exit codes: 0 ok, 1 usage, 2 stage failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "subdiff/checkpoint.hpp"
#include "subdiff/datasets.hpp"
#include "subdiff/diffusion.hpp"
#include "subdiff/edit.hpp"
#include "subdiff/io.hpp"
#include "subdiff/metrics.hpp"
#include "subdiff/pipeline.hpp"
#include "subdiff/stats.hpp"
#include "subdiff/stitch.hpp"
#include "subdiff/subgraph.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace subdiff;

namespace {

/// Bad flag combinations that CLI11 cannot express; exit code 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

fs::path resolve_out(const std::string& out, const std::string& fallback) {
  if (!out.empty()) return out;
  return default_output_root() / fallback;
}

json stats_json(const GraphStats& s, const Graph& g) {
  json j{{"nodes", g.num_nodes()},
         {"edges", g.num_edges()},
         {"power_law_exp", s.power_law_exp},
         {"triangle_count", s.triangle_count},
         {"transitivity", s.transitivity},
         {"char_path_length", s.char_path_length},
         {"assortativity", s.assortativity}};
  if (s.edge_overlap_pct) j["edge_overlap_pct"] = *s.edge_overlap_pct;
  return j;
}

/// Path length needs a connected graph, so disconnected input is described by its largest component.
json describe(const Graph& g, const Graph* reference = nullptr) {
  if (is_connected(g)) return stats_json(graph_stats(g, reference), g);
  const auto lcc = largest_connected_component(g);
  json j = stats_json(graph_stats(lcc.graph, reference), lcc.graph);
  j["stats_on"] = "largest_component";
  j["total_nodes"] = g.num_nodes();
  j["total_edges"] = g.num_edges();
  return j;
}

// ------------------------------------------------------------------ corrupt

struct CorruptArgs {
  std::string input;
  std::string labels;
  bool ba_shapes{false};
  BaShapesParams ba;
  std::string mode{"remove"};
  double frac{0.1};
  std::uint64_t seed{0};
  std::string out;
};

void run_corrupt(const CorruptArgs& a) {
  if (a.input.empty() == !a.ba_shapes) throw UsageError("corrupt: give exactly one of --input or --ba-shapes");
  DatasetConfig dc;
  dc.kind = a.ba_shapes ? "ba_shapes" : "edges";
  dc.path = a.input;
  dc.labels = a.labels;
  dc.ba = a.ba;
  const Dataset data = load_dataset(dc);
  CorruptionSpec spec{parse_corruption_mode(a.mode), a.frac, a.seed};
  const auto r = corrupt(data.graph, spec, data.motif_edges);
  const fs::path dir = resolve_out(a.out, "corrupt");
  write_edge_list(dir / "target.edges", r.target.edges(), "target graph");
  write_edge_list(dir / "observed.edges", r.observed.edges(), "observed graph");
  write_edge_list(dir / "missing.edges", r.missing_edges, "E_T minus E_O");
  write_edge_list(dir / "added.edges", r.added_edges, "E_O minus E_T");
  std::cout << "wrote " << dir.string() << ": " << r.missing_edges.size() << " missing, " << r.added_edges.size()
            << " added\n";
}

// ------------------------------------------------------------------ sample

struct SampleArgs {
  std::string input;
  std::string labels;
  int hops{2};
  std::size_t nmax{50};
  std::uint64_t seed{0};
  int context_dim{2};
  std::string out;
};

Graph read_graph(const std::string& path, const std::string& labels) {
  Graph g = load_edge_list(path);
  if (!labels.empty()) load_labels(labels, g);
  return g;
}

std::string sub_name(std::size_t i) {
  std::ostringstream s;
  s << "sub_" << std::string(i < 10 ? 4 : i < 100 ? 3 : i < 1000 ? 2 : i < 10000 ? 1 : 0, '0') << i << ".edges";
  return s.str();
}

void run_sample(const SampleArgs& a) {
  const Graph g = read_graph(a.input, a.labels);
  const auto C = global_context(g, a.context_dim);
  const auto subs = subsample_all(sample_ego_networks(g, C, a.hops), a.nmax, a.seed);
  const fs::path dir = resolve_out(a.out, "samples");
  json items = json::array();
  for (std::size_t i = 0; i < subs.size(); ++i) {
    const auto& s = subs[i];
    write_edge_list(dir / sub_name(i), s.graph.edges(), "local ids; see manifest.json");
    json rows = json::array();
    for (Eigen::Index r = 0; r < s.context.rows(); ++r) rows.push_back(context_row(s.context, r));
    json item{{"file", sub_name(i)}, {"center", s.parent_ids[s.center]}, {"parent_ids", s.parent_ids},
              {"context", rows}};
    if (s.graph.has_labels()) item["labels"] = s.graph.labels();
    items.push_back(std::move(item));
  }
  json manifest{{"source", a.input},     {"hops", a.hops},           {"n_max", a.nmax},
                {"seed", a.seed},        {"context_columns", C.cols()}, {"num_classes", g.num_classes()},
                {"subgraphs", items}};
  write_file_atomic(dir / "manifest.json", manifest.dump() + "\n");
  std::cout << "wrote " << subs.size() << " subgraphs to " << dir.string() << '\n';
}

// ------------------------------------------------------------------ train

struct TrainArgs {
  SampleArgs sampling;
  std::string config;
  std::optional<int> T, layers, hidden, batch;
  std::optional<long> steps;
  std::optional<double> lr;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> transition;
  bool use_labels{false};
  std::string out;
  std::string loss_log;
  // Optional regressor fit on the same subgraphs.
  std::string regressor_out;
  std::string attr{"sum_degree"};
  std::string arch{"mp"};
  long regressor_steps{1000};
};

void run_train(const TrainArgs& a) {
  TrainConfig tc;
  if (!a.config.empty()) tc = train_config_from_json(json::parse(read_file(a.config)));
  if (a.T) tc.T = *a.T;
  if (a.layers) tc.net.layers = *a.layers;
  if (a.hidden) tc.net.hidden = *a.hidden;
  if (a.batch) tc.batch = *a.batch;
  if (a.steps) tc.steps = *a.steps;
  if (a.lr) tc.lr = *a.lr;
  if (a.seed) tc.seed = *a.seed;
  if (a.transition) tc.transition = parse_transition_kind(*a.transition);
  if (a.use_labels) tc.use_labels = true;

  const Graph g = read_graph(a.sampling.input, a.sampling.labels);
  const auto C = global_context(g, a.sampling.context_dim);
  const auto subs = subsample_all(sample_ego_networks(g, C, a.sampling.hops), a.sampling.nmax, a.sampling.seed);
  tc.net.context_dim = static_cast<int>(C.cols());
  tc.net.n_max = a.sampling.nmax;
  tc.net.num_classes = tc.use_labels ? g.num_classes() : 0;
  if (tc.use_labels && !g.has_labels()) throw UsageError("train: --use-labels needs --labels");

  std::ostringstream log;
  log.precision(17);
  log << "step,loss\n";
  const long every = std::max<long>(1, tc.steps / 20);
  const auto model = train(subs, tc, [&](long step, double loss) {
    log << step << ',' << loss << '\n';
    if (step % every == 0 || step + 1 == tc.steps) std::cerr << "step " << step << " loss " << loss << '\n';
  });
  const fs::path out = a.out.empty() ? default_output_root() / "model.json" : fs::path(a.out);
  save_model(out, model);
  const fs::path loss_path = a.loss_log.empty() ? fs::path(out).replace_extension(".loss.csv") : fs::path(a.loss_log);
  write_file_atomic(loss_path, log.str());
  std::cout << "wrote " << out.string() << " (" << subs.size() << " subgraphs)\n";

  if (!a.regressor_out.empty()) {
    RegressorConfig rc;
    rc.attr = parse_style_attr(a.attr);
    rc.arch = parse_regressor_arch(a.arch);
    rc.steps = a.regressor_steps;
    rc.seed = tc.seed;
    const auto reg = train_regressor(subs, model, rc);
    write_file_atomic(a.regressor_out, regressor_to_json(reg).dump() + "\n");
    std::cout << "wrote " << a.regressor_out << '\n';
  }
}

// ------------------------------------------------------------------ edit

struct EditArgs {
  std::string task{"expand"};
  std::string subgraph;
  std::string manifest;
  std::string model;
  int rounds{10};
  std::uint64_t seed{0};
  std::string attr{"sum_degree"};
  std::optional<double> target;
  double lambda{100.0};
  std::string regressor;
  std::string out;
};

/// The manifest entry written by `sample` for this edge-list file.
Subgraph load_manifest_subgraph(const fs::path& edges_path, const fs::path& manifest_path) {
  const json m = json::parse(read_file(manifest_path));
  const std::string file = edges_path.filename().string();
  for (const auto& item : m.at("subgraphs")) {
    if (item.at("file").get<std::string>() != file) continue;
    Subgraph s;
    s.parent_ids = item.at("parent_ids").get<std::vector<NodeId>>();
    const auto rows = item.at("context").get<std::vector<ContextRow>>();
    if (rows.size() != s.parent_ids.size() || rows.empty()) {
      throw std::runtime_error(manifest_path.string() + ": context rows do not match parent_ids for " + file);
    }
    s.context.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t j = 0; j < rows[i].size(); ++j) {
        s.context(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
      }
    }
    const auto center = item.at("center").get<NodeId>();
    s.center = static_cast<std::size_t>(std::find(s.parent_ids.begin(), s.parent_ids.end(), center) -
                                        s.parent_ids.begin());
    s.graph = Graph(s.parent_ids.size(), load_edges(edges_path));
    if (item.contains("labels")) s.graph.set_labels(item.at("labels").get<std::vector<int>>(), m.at("num_classes"));
    return s;
  }
  throw std::runtime_error(manifest_path.string() + " has no entry for " + file);
}

void run_edit_cmd(const EditArgs& a) {
  const EditTask task = parse_edit_task(a.task);
  if (task == EditTask::style && (a.regressor.empty() || !a.target)) {
    throw UsageError("edit: --task style needs --regressor and --target");
  }
  const fs::path sub_path = a.subgraph;
  const fs::path manifest = a.manifest.empty() ? sub_path.parent_path() / "manifest.json" : fs::path(a.manifest);
  const DiffusionModel model = load_model(a.model);
  EditRequest req;
  req.observed = load_manifest_subgraph(sub_path, manifest);
  req.task = task;
  req.R = a.rounds;
  req.seed = a.seed;
  Regressor reg;
  if (task == EditTask::style) {
    reg = regressor_from_json(json::parse(read_file(a.regressor)));
    if (reg.config.attr != parse_style_attr(a.attr)) {
      throw UsageError("edit: regressor was trained for " + to_string(reg.config.attr) + ", not " + a.attr);
    }
    req.regressor = &reg;
    req.target = *a.target;
    req.lambda = a.lambda;
  }
  const auto outs = run_edit(req, model);
  const fs::path dir = resolve_out(a.out, "edits");
  for (std::size_t r = 0; r < outs.size(); ++r) {
    std::ostringstream name;
    name << "sample_" << (r < 10 ? "0" : "") << r << ".edges";
    write_edge_list(dir / name.str(), outs[r].edges(), a.task + " sample, local ids");
  }
  std::cout << "wrote " << outs.size() << " samples to " << dir.string() << '\n';
}

// ------------------------------------------------------------------ stitch

struct StitchArgs {
  std::string model;
  std::uint64_t seed{0};
  double epsilon{0.0};
  std::string reference;
  std::string out;
  std::string report;
};

void run_stitch(const StitchArgs& a) {
  const DiffusionModel model = load_model(a.model);
  StitchOptions opt;
  opt.seed = a.seed;
  opt.epsilon_match = a.epsilon;
  const auto res = generate_large(model, opt);
  const fs::path out = a.out.empty() ? default_output_root() / "gen.edges" : fs::path(a.out);
  write_edge_list(out, res.graph.edges(), "stitched graph");
  json rep{{"iterations", res.iterations}, {"generated", describe(res.graph)}};
  if (!a.reference.empty()) {
    const Graph ref = load_edge_list(a.reference);
    rep["reference"] = describe(ref);
    // Generated node order follows context rows; map back to the nodes that carried them.
    EdgeList mapped;
    for (const auto& e : res.graph.edges()) mapped.emplace_back(res.source_nodes[e.u], res.source_nodes[e.v]);
    const Graph back(std::max(ref.num_nodes(), res.graph.num_nodes()), std::move(mapped));
    const auto shared = edge_intersection(back.edges(), ref.edges()).size();
    rep["reference_edge_recall"] = ref.num_edges() ? static_cast<double>(shared) / ref.num_edges() : 0.0;
  }
  const std::string text = rep.dump(2) + "\n";
  if (!a.report.empty()) write_file_atomic(a.report, text);
  std::cout << text;
}

// ------------------------------------------------------------------ eval

struct EvalArgs {
  std::string samples;
  std::string observed;
  std::string target;
  std::string edit_set;
  std::string task{"expand"};
  bool aligned{false};
  std::string out;
};

void run_eval(const EvalArgs& a) {
  const Graph observed = load_edge_list(a.observed);
  const Graph target = load_edge_list(a.target);
  const std::size_t n = std::max(observed.num_nodes(), target.num_nodes());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(a.samples)) {
    if (entry.path().extension() == ".edges") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw std::runtime_error("eval: no .edges files in " + a.samples);
  std::vector<Graph> samples;
  for (const auto& f : files) {
    auto edges = load_edges(f);
    std::size_t m = n;
    for (const auto& e : edges) m = std::max<std::size_t>(m, std::size_t{e.v} + 1);
    samples.emplace_back(m, std::move(edges));
  }
  const EdgeList edit = a.edit_set.empty() ? EdgeList{} : canonical_edges(load_edges(a.edit_set));
  const Graph obs_n(n, observed.edges());
  const Graph tgt_n(n, target.edges());
  json rep = evaluate(a.task, samples, obs_n, tgt_n, edit, a.aligned).to_json();
  rep["config"] = {{"samples", a.samples}, {"observed", a.observed}, {"target", a.target},
                   {"edit_set", a.edit_set}, {"aligned", a.aligned}};
  const std::string text = rep.dump(2) + "\n";
  if (!a.out.empty()) write_file_atomic(a.out, text);
  std::cout << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"subgraph diffusion for refining a partially observed network"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "subdiff 0.1.0");

  CorruptArgs ca;
  auto* corrupt_cmd = app.add_subcommand("corrupt", "Corrupt a clean graph into an observed graph");
  corrupt_cmd->add_option("--input", ca.input, "Edge list of the clean graph");
  corrupt_cmd->add_option("--labels", ca.labels, "node_id,label CSV");
  corrupt_cmd->add_flag("--ba-shapes", ca.ba_shapes, "Generate a BA-Shapes graph instead of reading one");
  corrupt_cmd->add_option("--n-base", ca.ba.n_base, "BA base size")->capture_default_str();
  corrupt_cmd->add_option("--ba-m", ca.ba.m, "BA attachment count")->capture_default_str();
  corrupt_cmd->add_option("--motifs", ca.ba.n_motifs, "Number of houses")->capture_default_str();
  corrupt_cmd->add_option("--ba-seed", ca.ba.seed, "Generator seed")->capture_default_str();
  corrupt_cmd->add_option("--mode", ca.mode, "remove | add | motif")
      ->check(CLI::IsMember({"remove", "add", "motif"}))
      ->capture_default_str();
  corrupt_cmd->add_option("--frac", ca.frac, "Corruption fraction")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  corrupt_cmd->add_option("--seed", ca.seed, "Corruption seed")->capture_default_str();
  corrupt_cmd->add_option("--out", ca.out, "Output directory");

  SampleArgs sa;
  auto* sample_cmd = app.add_subcommand("sample", "Extract context-tagged ego-network subgraphs");
  sample_cmd->add_option("--input", sa.input, "Observed edge list")->required();
  sample_cmd->add_option("--labels", sa.labels, "node_id,label CSV");
  sample_cmd->add_option("--hops", sa.hops, "Ego-network radius")->check(CLI::PositiveNumber)->capture_default_str();
  sample_cmd->add_option("--nmax", sa.nmax, "Maximum subgraph size")->check(CLI::Range(2, 1000000))->capture_default_str();
  sample_cmd->add_option("--seed", sa.seed, "Subsampling seed")->capture_default_str();
  sample_cmd->add_option("--context-dim", sa.context_dim, "Eigenvector columns")->check(CLI::PositiveNumber)->capture_default_str();
  sample_cmd->add_option("--out", sa.out, "Output directory");

  TrainArgs ta;
  auto* train_cmd = app.add_subcommand("train", "Train the denoiser on subgraphs of a graph");
  train_cmd->add_option("--input", ta.sampling.input, "Observed edge list")->required();
  train_cmd->add_option("--labels", ta.sampling.labels, "node_id,label CSV");
  train_cmd->add_option("--hops", ta.sampling.hops, "Ego-network radius")->capture_default_str();
  train_cmd->add_option("--nmax", ta.sampling.nmax, "Maximum subgraph size")->capture_default_str();
  train_cmd->add_option("--sample-seed", ta.sampling.seed, "Subsampling seed")->capture_default_str();
  train_cmd->add_option("--context-dim", ta.sampling.context_dim, "Eigenvector columns")->capture_default_str();
  train_cmd->add_option("--config", ta.config, "JSON with diffusion settings; flags override it");
  train_cmd->add_option("--T", ta.T, "Diffusion steps");
  train_cmd->add_option("--steps", ta.steps, "Optimizer steps");
  train_cmd->add_option("--batch", ta.batch, "Batch size");
  train_cmd->add_option("--lr", ta.lr, "Adam learning rate");
  train_cmd->add_option("--layers", ta.layers, "Denoiser layers");
  train_cmd->add_option("--hidden", ta.hidden, "Hidden width");
  train_cmd->add_option("--seed", ta.seed, "Training seed");
  train_cmd->add_option("--transition", ta.transition, "marginal | absorbing")
      ->check(CLI::IsMember({"marginal", "absorbing"}));
  train_cmd->add_flag("--use-labels", ta.use_labels, "Diffuse node labels as well");
  train_cmd->add_option("--out", ta.out, "Checkpoint path");
  train_cmd->add_option("--loss-log", ta.loss_log, "CSV of step,loss (default next to the checkpoint)");
  train_cmd->add_option("--regressor-out", ta.regressor_out, "Also fit a style regressor and save it here");
  train_cmd->add_option("--attr", ta.attr, "sum_degree | max_degree | triangles")
      ->check(CLI::IsMember({"sum_degree", "max_degree", "triangles"}))
      ->capture_default_str();
  train_cmd->add_option("--arch", ta.arch, "mp | mp-sum | attn")
      ->check(CLI::IsMember({"mp", "mp-sum", "attn"}))
      ->capture_default_str();
  train_cmd->add_option("--regressor-steps", ta.regressor_steps, "Regressor optimizer steps")->capture_default_str();

  EditArgs ea;
  auto* edit_cmd = app.add_subcommand("edit", "Expand, denoise or restyle one subgraph");
  edit_cmd->add_option("--task", ea.task, "expand | denoise | style")
      ->check(CLI::IsMember({"expand", "denoise", "style"}))
      ->capture_default_str();
  edit_cmd->add_option("--subgraph", ea.subgraph, "Edge list written by `sample`")->required()->check(CLI::ExistingFile);
  edit_cmd->add_option("--manifest", ea.manifest, "Sample manifest (default: manifest.json next to --subgraph)");
  edit_cmd->add_option("--model", ea.model, "Checkpoint")->required()->check(CLI::ExistingFile);
  edit_cmd->add_option("--rounds", ea.rounds, "Samples R")->check(CLI::PositiveNumber)->capture_default_str();
  edit_cmd->add_option("--seed", ea.seed, "Sampling seed")->capture_default_str();
  edit_cmd->add_option("--attr", ea.attr, "Style attribute")
      ->check(CLI::IsMember({"sum_degree", "max_degree", "triangles"}))
      ->capture_default_str();
  edit_cmd->add_option("--target", ea.target, "Style target value");
  edit_cmd->add_option("--lambda", ea.lambda, "Guidance scale")->check(CLI::NonNegativeNumber)->capture_default_str();
  edit_cmd->add_option("--regressor", ea.regressor, "Regressor JSON");
  edit_cmd->add_option("--out", ea.out, "Output directory");

  StitchArgs sta;
  auto* stitch_cmd = app.add_subcommand("stitch", "Generate a large graph by stitching sampled subgraphs");
  stitch_cmd->add_option("--model", sta.model, "Checkpoint")->required()->check(CLI::ExistingFile);
  stitch_cmd->add_option("--seed", sta.seed, "Sampling seed")->capture_default_str();
  stitch_cmd->add_option("--epsilon", sta.epsilon, "Context-row matching tolerance")->capture_default_str();
  stitch_cmd->add_option("--reference", sta.reference, "Training graph to compare against");
  stitch_cmd->add_option("--out", sta.out, "Generated edge list");
  stitch_cmd->add_option("--report", sta.report, "Stats report JSON");

  EvalArgs eva;
  auto* eval_cmd = app.add_subcommand("eval", "Score a directory of edited samples");
  eval_cmd->add_option("--samples", eva.samples, "Directory of .edges samples")->required()->check(CLI::ExistingDirectory);
  eval_cmd->add_option("--observed", eva.observed, "Observed edge list")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--target", eva.target, "Target edge list")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--edit-set", eva.edit_set, "Pairs to score consensus on");
  eval_cmd->add_option("--task", eva.task, "Task name echoed in the report")->capture_default_str();
  eval_cmd->add_flag("--aligned", eva.aligned, "Relabel by degree before overlap");
  eval_cmd->add_option("--out", eva.out, "Report path");

  std::string stats_input;
  std::string stats_reference;
  auto* stats_cmd = app.add_subcommand("stats", "Print graph statistics as JSON");
  stats_cmd->add_option("--input", stats_input, "Edge list")->required()->check(CLI::ExistingFile);
  stats_cmd->add_option("--reference", stats_reference, "Reference graph for aligned edge overlap");
  stats_cmd->add_flag("--lcc", "Restrict to the largest connected component first");

  std::string pipe_config;
  std::string pipe_root;
  auto* pipe_cmd = app.add_subcommand("pipeline", "Corrupt, sample, train, edit and evaluate from one config");
  pipe_cmd->add_option("--config", pipe_config, "Run config JSON")->required()->check(CLI::ExistingFile);
  pipe_cmd->add_option("--output-root", pipe_root, "Overrides $SUBDIFF_OUTPUT_ROOT");

  std::string plot_runs;
  std::string plot_out;
  auto* plot_cmd = app.add_subcommand("plot-data", "Collect per-metric CSVs across runs");
  plot_cmd->add_option("--runs", plot_runs, "Run directory or directory of runs")->required();
  plot_cmd->add_option("--out", plot_out, "CSV directory (default: --runs)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    if (cmd == "corrupt") run_corrupt(ca);
    if (cmd == "sample") run_sample(sa);
    if (cmd == "train") run_train(ta);
    if (cmd == "edit") run_edit_cmd(ea);
    if (cmd == "stitch") run_stitch(sta);
    if (cmd == "eval") run_eval(eva);
    if (cmd == "stats") {
      Graph g = load_edge_list(stats_input);
      if (stats_cmd->count("--lcc") > 0) g = largest_connected_component(g).graph;
      std::optional<Graph> ref;
      if (!stats_reference.empty()) ref = load_edge_list(stats_reference);
      std::cout << describe(g, ref ? &*ref : nullptr).dump(2) << '\n';
    }
    if (cmd == "pipeline") {
      const auto cfg = RunConfig::from_json(json::parse(read_file(pipe_config)));
      const fs::path root = pipe_root.empty() ? default_output_root() : fs::path(pipe_root);
      const auto res = run_pipeline(cfg, root, fs::path(pipe_config).parent_path());
      std::cout << "wrote " << res.dir.string() << '\n';
    }
    if (cmd == "plot-data") {
      for (const auto& p : emit_plot_data(plot_runs, plot_out.empty() ? plot_runs : plot_out)) {
        std::cout << p.string() << '\n';
      }
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const StageError& e) {
    std::cerr << "stage " << e.stage() << " failed: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << cmd << " failed: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
