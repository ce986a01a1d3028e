#include "subdiff/pipeline.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <set>
#include <sstream>

#include "subdiff/checkpoint.hpp"
#include "subdiff/io.hpp"
#include "subdiff/stats.hpp"
#include "subdiff/subgraph.hpp"

namespace subdiff {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------- config I/O

nlohmann::json RunConfig::to_json() const {
  json j;
  j["name"] = name;
  j["dataset"] = {
      {"kind", dataset.kind},
      {"path", dataset.path},
      {"labels", dataset.labels},
      {"largest_component", dataset.largest_component},
      {"n_base", dataset.ba.n_base},
      {"m", dataset.ba.m},
      {"n_motifs", dataset.ba.n_motifs},
      {"random_edge_frac", dataset.ba.random_edge_frac},
      {"seed", dataset.ba.seed},
      {"motif_edges", dataset.motif_edges},
  };
  j["corruption"] = {
      {"mode", to_string(corruption.spec.mode)},
      {"frac", corruption.spec.frac},
      {"seed", corruption.spec.seed},
      {"add_pool", corruption.add_pool},
  };
  j["sampling"] = {
      {"hops", sampling.hops},
      {"n_max", sampling.n_max},
      {"seed", sampling.seed},
      {"context_dim", sampling.context_dim},
  };
  json d = train_config_to_json(diffusion);
  // Derived from the data at train time; not user settings.
  d.erase("context_dim");
  d.erase("num_classes");
  d.erase("n_max");
  j["diffusion"] = d;
  j["edit"] = {
      {"task", to_string(edit.task)},
      {"R", edit.R},
      {"seed", edit.seed},
      {"region_hops", edit.region_hops},
      {"max_regions", edit.max_regions},
      {"attr", to_string(edit.attr)},
      {"target_delta", edit.target_delta},
      {"lambda", edit.lambda},
      {"regressor",
       {{"arch", to_string(edit.regressor.arch)},
        {"layers", edit.regressor.layers},
        {"hidden", edit.regressor.hidden},
        {"time_dim", edit.regressor.time_dim},
        {"steps", edit.regressor.steps},
        {"batch", edit.regressor.batch},
        {"lr", edit.regressor.lr},
        {"seed", edit.regressor.seed}}},
  };
  j["output_dir"] = output_dir;
  return j;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  reject_unknown_keys(j, {"name", "dataset", "corruption", "sampling", "diffusion", "edit", "output_dir"}, "config");
  RunConfig c;
  c.name = j.value("name", c.name);
  c.output_dir = j.value("output_dir", c.output_dir);
  if (j.contains("dataset")) {
    const auto& d = j.at("dataset");
    reject_unknown_keys(d,
                        {"kind", "path", "labels", "largest_component", "n_base", "m", "n_motifs",
                         "random_edge_frac", "seed", "motif_edges"},
                        "config.dataset");
    c.dataset.kind = d.value("kind", c.dataset.kind);
    c.dataset.path = d.value("path", c.dataset.path);
    c.dataset.labels = d.value("labels", c.dataset.labels);
    c.dataset.largest_component = d.value("largest_component", c.dataset.largest_component);
    c.dataset.ba.n_base = d.value("n_base", c.dataset.ba.n_base);
    c.dataset.ba.m = d.value("m", c.dataset.ba.m);
    c.dataset.ba.n_motifs = d.value("n_motifs", c.dataset.ba.n_motifs);
    c.dataset.ba.random_edge_frac = d.value("random_edge_frac", c.dataset.ba.random_edge_frac);
    c.dataset.ba.seed = d.value("seed", c.dataset.ba.seed);
    c.dataset.motif_edges = d.value("motif_edges", c.dataset.motif_edges);
    if (c.dataset.kind != "edges" && c.dataset.kind != "ba_shapes") {
      throw std::invalid_argument("config.dataset.kind must be 'edges' or 'ba_shapes'");
    }
    if (c.dataset.motif_edges != "all" && c.dataset.motif_edges != "roof") {
      throw std::invalid_argument("config.dataset.motif_edges must be 'all' or 'roof'");
    }
  }
  if (j.contains("corruption")) {
    const auto& d = j.at("corruption");
    reject_unknown_keys(d, {"mode", "frac", "seed", "add_pool"}, "config.corruption");
    if (d.contains("mode")) c.corruption.spec.mode = parse_corruption_mode(d.at("mode").get<std::string>());
    c.corruption.spec.frac = d.value("frac", c.corruption.spec.frac);
    c.corruption.spec.seed = d.value("seed", c.corruption.spec.seed);
    c.corruption.add_pool = d.value("add_pool", c.corruption.add_pool);
    if (c.corruption.add_pool != "any" && c.corruption.add_pool != "motif") {
      throw std::invalid_argument("config.corruption.add_pool must be 'any' or 'motif'");
    }
  }
  if (j.contains("sampling")) {
    const auto& d = j.at("sampling");
    reject_unknown_keys(d, {"hops", "n_max", "seed", "context_dim"}, "config.sampling");
    c.sampling.hops = d.value("hops", c.sampling.hops);
    c.sampling.n_max = d.value("n_max", c.sampling.n_max);
    c.sampling.seed = d.value("seed", c.sampling.seed);
    c.sampling.context_dim = d.value("context_dim", c.sampling.context_dim);
  }
  if (j.contains("diffusion")) c.diffusion = train_config_from_json(j.at("diffusion"));
  if (j.contains("edit")) {
    const auto& d = j.at("edit");
    reject_unknown_keys(
        d, {"task", "R", "seed", "region_hops", "max_regions", "attr", "target_delta", "lambda", "regressor"},
        "config.edit");
    if (d.contains("task")) c.edit.task = parse_edit_task(d.at("task").get<std::string>());
    c.edit.R = d.value("R", c.edit.R);
    c.edit.seed = d.value("seed", c.edit.seed);
    c.edit.region_hops = d.value("region_hops", c.edit.region_hops);
    c.edit.max_regions = d.value("max_regions", c.edit.max_regions);
    if (d.contains("attr")) c.edit.attr = parse_style_attr(d.at("attr").get<std::string>());
    c.edit.target_delta = d.value("target_delta", c.edit.target_delta);
    c.edit.lambda = d.value("lambda", c.edit.lambda);
    if (d.contains("regressor")) {
      const auto& r = d.at("regressor");
      reject_unknown_keys(r, {"arch", "layers", "hidden", "time_dim", "steps", "batch", "lr", "seed"},
                          "config.edit.regressor");
      if (r.contains("arch")) c.edit.regressor.arch = parse_regressor_arch(r.at("arch").get<std::string>());
      c.edit.regressor.layers = r.value("layers", c.edit.regressor.layers);
      c.edit.regressor.hidden = r.value("hidden", c.edit.regressor.hidden);
      c.edit.regressor.time_dim = r.value("time_dim", c.edit.regressor.time_dim);
      c.edit.regressor.steps = r.value("steps", c.edit.regressor.steps);
      c.edit.regressor.batch = r.value("batch", c.edit.regressor.batch);
      c.edit.regressor.lr = r.value("lr", c.edit.regressor.lr);
      c.edit.regressor.seed = r.value("seed", c.edit.regressor.seed);
    }
    if (c.edit.R < 1) throw std::invalid_argument("config.edit.R must be >= 1");
    if (c.edit.lambda < 0) throw std::invalid_argument("config.edit.lambda must be >= 0");
  }
  c.edit.regressor.attr = c.edit.attr;
  if (c.sampling.hops < 1 || c.sampling.n_max < 2 || c.sampling.context_dim < 1) {
    throw std::invalid_argument("config.sampling: hops >= 1, n_max >= 2 and context_dim >= 1 required");
  }
  return c;
}

fs::path default_output_root() {
  if (const char* env = std::getenv("SUBDIFF_OUTPUT_ROOT"); env != nullptr && *env != '\0') return env;
  return "subdiff-out";
}

// ---------------------------------------------------------------- stages

Dataset load_dataset(const DatasetConfig& cfg, const fs::path& base_dir) {
  Dataset d;
  if (cfg.kind == "ba_shapes") {
    auto shapes = generate_ba_shapes(cfg.ba);
    d.motif_edges = cfg.motif_edges == "roof" ? shapes.roof_edges : shapes.motif_edges;
    d.chord_pool = motif_non_edges(shapes);
    d.graph = std::move(shapes.graph);
    return d;
  }
  const fs::path path = fs::path(cfg.path).is_absolute() || base_dir.empty() ? fs::path(cfg.path) : base_dir / cfg.path;
  Graph g = load_edge_list(path);
  if (!cfg.labels.empty()) {
    const fs::path lp =
        fs::path(cfg.labels).is_absolute() || base_dir.empty() ? fs::path(cfg.labels) : base_dir / cfg.labels;
    load_labels(lp, g);
  }
  d.graph = cfg.largest_component ? largest_connected_component(g).graph : std::move(g);
  return d;
}

std::vector<EditRegion> build_edit_regions(const Graph& observed, const Eigen::MatrixXd& context,
                                           const EdgeList& edit_pairs, int hops, std::size_t n_max,
                                           std::uint64_t seed, std::size_t max_regions) {
  std::vector<EditRegion> regions;
  std::vector<std::set<NodeId>> members;
  for (std::size_t idx = 0; idx < edit_pairs.size(); ++idx) {
    const Edge& e = edit_pairs[idx];
    bool placed = false;
    for (std::size_t r = 0; r < regions.size() && !placed; ++r) {
      if (members[r].count(e.u) && members[r].count(e.v)) {
        regions[r].pairs.push_back(e);
        placed = true;
      }
    }
    if (placed) continue;
    if (max_regions > 0 && regions.size() >= max_regions) continue;

    std::set<NodeId> nodes;
    for (NodeId end : {e.u, e.v}) {
      for (NodeId w : ego_nodes(observed, end, hops)) nodes.insert(w);
    }
    std::vector<NodeId> keep;
    if (nodes.size() <= n_max) {
      keep.assign(nodes.begin(), nodes.end());
    } else {
      Rng rng = make_rng(seed, (static_cast<std::uint64_t>(e.u) << 32) | e.v);
      std::set<NodeId> chosen{e.u, e.v};
      std::vector<NodeId> ring;
      for (NodeId end : {e.u, e.v}) {
        for (NodeId w : observed.neighbors(end)) {
          if (!chosen.count(w)) ring.push_back(w);
        }
      }
      std::sort(ring.begin(), ring.end());
      ring.erase(std::unique(ring.begin(), ring.end()), ring.end());
      std::shuffle(ring.begin(), ring.end(), rng);
      for (NodeId w : ring) {
        if (chosen.size() >= n_max) break;
        chosen.insert(w);
      }
      std::vector<NodeId> rest;
      for (NodeId w : nodes) {
        if (!chosen.count(w)) rest.push_back(w);
      }
      std::shuffle(rest.begin(), rest.end(), rng);
      for (NodeId w : rest) {
        if (chosen.size() >= n_max) break;
        chosen.insert(w);
      }
      keep.assign(chosen.begin(), chosen.end());
    }
    EditRegion region;
    region.sub = make_subgraph(observed, context, keep, e.u);
    region.pairs.push_back(e);
    members.emplace_back(keep.begin(), keep.end());
    regions.push_back(std::move(region));
  }
  return regions;
}

namespace {

/// owner[u][v] region index for pairs inside some region (first one wins).
std::map<Edge, std::size_t> pair_owners(const std::vector<EditRegion>& regions) {
  std::map<Edge, std::size_t> owner;
  for (std::size_t r = 0; r < regions.size(); ++r) {
    const auto& ids = regions[r].sub.parent_ids;
    for (std::size_t a = 0; a < ids.size(); ++a) {
      for (std::size_t b = a + 1; b < ids.size(); ++b) owner.emplace(Edge(ids[a], ids[b]), r);
    }
  }
  return owner;
}

}  // namespace

Graph assemble_sample(const Graph& observed, const std::vector<EditRegion>& regions,
                      const std::vector<const Graph*>& region_samples) {
  if (region_samples.size() != regions.size()) throw std::invalid_argument("assemble: one sample per region needed");
  const auto owner = pair_owners(regions);
  EdgeList edges;
  for (const auto& e : observed.edges()) {
    if (!owner.count(e)) edges.push_back(e);
  }
  for (const auto& [pair, r] : owner) {
    const auto& ids = regions[r].sub.parent_ids;
    const auto lu = static_cast<NodeId>(std::lower_bound(ids.begin(), ids.end(), pair.u) - ids.begin());
    const auto lv = static_cast<NodeId>(std::lower_bound(ids.begin(), ids.end(), pair.v) - ids.begin());
    if (region_samples[r]->has_edge(lu, lv)) edges.push_back(pair);
  }
  Graph g(observed.num_nodes(), std::move(edges));
  if (observed.has_labels()) g.set_labels(observed.labels(), observed.num_classes());
  return g;
}

double random_removal_baseline(const Graph& observed, const std::vector<EditRegion>& regions,
                               const std::vector<Graph>& samples, const EdgeList& added_edges) {
  const auto owner = pair_owners(regions);
  std::size_t owned_edges = 0;
  for (const auto& e : observed.edges()) owned_edges += owner.count(e);
  if (owned_edges == 0 || samples.empty() || added_edges.empty()) return 0.0;
  double total = 0.0;
  for (const auto& s : samples) {
    const double removed = static_cast<double>(edge_difference(observed.edges(), s.edges()).size());
    total += removed / static_cast<double>(owned_edges);
  }
  return total / static_cast<double>(samples.size());
}

namespace {

template <typename F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

json graph_summary(const Graph& g) {
  return {{"nodes", g.num_nodes()}, {"edges", g.num_edges()}, {"adjacency_nonzeros", g.adjacency_nonzeros()}};
}

std::string sample_name(int r) {
  std::ostringstream s;
  s << "sample_" << (r < 10 ? "0" : "") << r << ".edges";
  return s.str();
}

}  // namespace

RunResult run_pipeline(const RunConfig& config, const fs::path& output_root, const fs::path& base_dir) {
  RunResult result;
  result.dir = config.output_dir.empty() ? output_root / config.name : fs::path(config.output_dir);
  const fs::path& dir = result.dir;
  stage("setup", [&] {
    fs::create_directories(dir / "edits");
    write_file_atomic(dir / "config.json", config.to_json().dump(2) + "\n");
    return 0;
  });

  // Corruption.
  const Dataset data = stage("dataset", [&] { return load_dataset(config.dataset, base_dir); });
  const CorruptionResult cr = stage("corrupt", [&] {
    const EdgeList pool = config.corruption.add_pool == "motif" ? data.chord_pool : EdgeList{};
    if (config.corruption.add_pool == "motif" && pool.empty()) {
      throw std::invalid_argument("add_pool 'motif' needs a BA-Shapes dataset");
    }
    auto out = corrupt(data.graph, config.corruption.spec, data.motif_edges, pool);
    write_edge_list(dir / "target.edges", out.target.edges(), "target graph");
    write_edge_list(dir / "observed.edges", out.observed.edges(), "observed graph");
    write_edge_list(dir / "missing.edges", out.missing_edges, "E_T minus E_O");
    write_edge_list(dir / "added.edges", out.added_edges, "E_O minus E_T");
    return out;
  });
  const Graph& observed = cr.observed;

  // Sampling.
  Eigen::MatrixXd context;
  const std::vector<Subgraph> training = stage("sample", [&] {
    context = global_context(observed, config.sampling.context_dim);
    auto egos = sample_ego_networks(observed, context, config.sampling.hops);
    auto subs = subsample_all(egos, config.sampling.n_max, config.sampling.seed);
    json manifest;
    manifest["context_columns"] = context.cols();
    json items = json::array();
    for (const auto& s : subs) {
      items.push_back({{"center", s.parent_ids[s.center]}, {"parent_ids", s.parent_ids}});
    }
    manifest["subgraphs"] = std::move(items);
    json rows = json::array();
    for (Eigen::Index i = 0; i < context.rows(); ++i) rows.push_back(context_row(context, i));
    manifest["context"] = std::move(rows);
    write_file_atomic(dir / "samples.json", manifest.dump() + "\n");
    return subs;
  });

  // Training.
  std::vector<std::pair<long, double>> losses;
  const DiffusionModel model = stage("train", [&] {
    TrainConfig tc = config.diffusion;
    tc.net.context_dim = static_cast<int>(context.cols());
    tc.net.n_max = config.sampling.n_max;
    tc.net.num_classes = tc.use_labels && observed.has_labels() ? observed.num_classes() : 0;
    auto m = train(training, tc, [&](long step, double loss) { losses.emplace_back(step, loss); });
    std::ostringstream log;
    log << "step,loss\n";
    log.precision(17);
    for (const auto& [step, loss] : losses) log << step << ',' << loss << '\n';
    write_file_atomic(dir / "loss.csv", log.str());
    save_model(dir / "model.json", m);
    return m;
  });

  json report;
  report["run"] = config.name;
  report["dataset"] = graph_summary(data.graph);
  report["observed"] = graph_summary(observed);
  report["corruption"] = {{"mode", to_string(config.corruption.spec.mode)},
                          {"missing", cr.missing_edges.size()},
                          {"added", cr.added_edges.size()}};
  report["training"] = {{"subgraphs", training.size()},
                        {"steps", config.diffusion.steps},
                        {"final_loss", losses.empty() ? json(nullptr) : json(losses.back().second)}};

  const EditConfig& ec = config.edit;
  if (ec.task == EditTask::style) {
    stage("edit", [&] {
      Regressor reg = train_regressor(training, model, ec.regressor);
      write_file_atomic(dir / "regressor.json", regressor_to_json(reg).dump() + "\n");
      const std::size_t count = std::min<std::size_t>(ec.max_regions > 0 ? ec.max_regions : 4, training.size());
      Rng rng = make_rng(ec.seed, 0x57);
      std::vector<std::size_t> idx(training.size());
      for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
      std::shuffle(idx.begin(), idx.end(), rng);
      json items = json::array();
      double err = 0.0;
      double base = 0.0;
      std::size_t total = 0;
      for (std::size_t k = 0; k < count; ++k) {
        const Subgraph& s = training[idx[k]];
        EditRequest req;
        req.observed = s;
        req.task = EditTask::style;
        req.R = ec.R;
        req.seed = mix_seed(ec.seed, k);
        req.lambda = ec.lambda;
        req.regressor = &reg;
        const double original = attribute_value(s.graph, ec.attr);
        req.target = original + ec.target_delta;
        auto outs = style_transfer(req, model);
        json achieved = json::array();
        for (std::size_t r = 0; r < outs.size(); ++r) {
          const double v = attribute_value(outs[r], ec.attr);
          achieved.push_back(v);
          err += std::abs(v - req.target);
          base += std::abs(original - req.target);
          ++total;
          EdgeList parent;
          for (const auto& e : outs[r].edges()) parent.emplace_back(s.parent_ids[e.u], s.parent_ids[e.v]);
          write_edge_list(dir / "edits" / ("style_" + std::to_string(k) + "_" + sample_name(static_cast<int>(r))),
                          canonical_edges(parent), "style sample, parent ids");
        }
        items.push_back({{"center", s.parent_ids[s.center]}, {"original", original}, {"target", req.target},
                         {"achieved", achieved}});
      }
      report["style"] = {{"attr", to_string(ec.attr)},
                         {"lambda", ec.lambda},
                         {"regressor", to_string(ec.regressor.arch)},
                         {"mae", total ? err / static_cast<double>(total) : 0.0},
                         {"unguided_distance", total ? base / static_cast<double>(total) : 0.0},
                         {"subgraphs", items}};
      return 0;
    });
  } else {
    stage("edit", [&] {
      const EdgeList& pairs = ec.task == EditTask::expand ? cr.missing_edges : cr.added_edges;
      auto regions = build_edit_regions(observed, context, pairs, ec.region_hops, config.sampling.n_max, ec.seed,
                                        ec.max_regions);
      std::vector<std::vector<Graph>> region_out;
      for (std::size_t r = 0; r < regions.size(); ++r) {
        EditRequest req;
        req.observed = regions[r].sub;
        req.task = ec.task;
        req.R = ec.R;
        req.seed = mix_seed(ec.seed, r);
        region_out.push_back(run_edit(req, model));
      }
      std::vector<Graph> samples;
      for (int s = 0; s < ec.R; ++s) {
        std::vector<const Graph*> picks;
        for (const auto& outs : region_out) picks.push_back(&outs[static_cast<std::size_t>(s)]);
        samples.push_back(assemble_sample(observed, regions, picks));
        write_edge_list(dir / "edits" / sample_name(s), samples.back().edges(), "refined graph");
      }
      EdgeList covered;
      for (const auto& reg : regions) covered.insert(covered.end(), reg.pairs.begin(), reg.pairs.end());
      covered = canonical_edges(std::move(covered));
      MetricReport m = evaluate(to_string(ec.task), samples, observed, cr.target, covered);
      json metrics = m.to_json();
      metrics["edit_pairs_total"] = pairs.size();
      metrics["regions"] = regions.size();
      if (ec.task == EditTask::denoise) {
        metrics["random_removal_baseline"] = random_removal_baseline(observed, regions, samples, covered);
      }
      report["metrics"] = metrics;
      return 0;
    });
  }

  stage("report", [&] {
    write_file_atomic(dir / "report.json", report.dump(2) + "\n");
    return 0;
  });
  result.report = std::move(report);
  return result;
}

std::vector<fs::path> emit_plot_data(const fs::path& runs_dir, const fs::path& out_dir) {
  std::map<std::string, json> reports;
  auto consider = [&](const fs::path& d) {
    const fs::path p = d / "report.json";
    if (fs::is_regular_file(p)) reports[d.filename().string()] = json::parse(read_file(p));
  };
  if (!fs::is_directory(runs_dir)) throw std::invalid_argument("plot-data: " + runs_dir.string() + " is not a directory");
  consider(runs_dir);
  for (const auto& entry : fs::directory_iterator(runs_dir)) {
    if (entry.is_directory()) consider(entry.path());
  }
  if (reports.empty()) {
    throw std::invalid_argument("plot-data: no report.json in " + runs_dir.string() + "; expected " +
                                (runs_dir / "report.json").string() + " or " +
                                (runs_dir / "<run>" / "report.json").string());
  }
  fs::create_directories(out_dir);
  std::vector<fs::path> written;
  for (const char* metric : {"consensus", "diversity", "sparsity", "edge_overlap"}) {
    std::ostringstream csv;
    csv.precision(17);
    csv << "run_id," << metric << '\n';
    for (const auto& [run, rep] : reports) {
      csv << run << ',';
      if (rep.contains("metrics") && rep["metrics"].contains(metric) && !rep["metrics"][metric].is_null()) {
        csv << rep["metrics"][metric].get<double>();
      }
      csv << '\n';
    }
    const fs::path p = out_dir / (std::string(metric) + ".csv");
    write_file_atomic(p, csv.str());
    written.push_back(p);
  }
  return written;
}

}  // namespace subdiff
