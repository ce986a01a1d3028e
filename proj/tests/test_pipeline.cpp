#include <doctest.h>

#include <cstdlib>
#include <fstream>

#include "helpers.hpp"
#include "subdiff/io.hpp"
#include "subdiff/pipeline.hpp"

using namespace subdiff;
using namespace testing;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

RunConfig toy_config(const std::string& name, EditTask task, long steps) {
  RunConfig c;
  c.name = name;
  c.dataset.kind = "ba_shapes";
  c.dataset.ba.n_base = 100;
  c.dataset.ba.m = 3;
  c.dataset.ba.n_motifs = 20;
  c.dataset.ba.seed = 1;
  c.corruption.spec.mode = task == EditTask::expand ? CorruptionMode::remove : CorruptionMode::add;
  c.corruption.spec.frac = 0.02;
  c.corruption.spec.seed = 2;
  c.sampling.n_max = 30;
  c.diffusion.T = 10;
  c.diffusion.steps = steps;
  c.diffusion.batch = 2;
  c.diffusion.net.layers = 1;
  c.diffusion.net.hidden = 16;
  c.edit.task = task;
  c.edit.R = 3;
  c.edit.max_regions = 3;
  return c;
}

int run_cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + std::string(SUBDIFF_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("config JSON round trip and unknown keys") {
  auto c = toy_config("x", EditTask::style, 5);
  c.edit.regressor.arch = RegressorArch::attn;
  const json j = c.to_json();
  CHECK(RunConfig::from_json(j).to_json() == j);
  json bad = j;
  bad["sampling"]["hopz"] = 2;
  CHECK_THROWS_WITH(RunConfig::from_json(bad), doctest::Contains("hopz"));
  bad = j;
  bad["extra"] = true;
  CHECK_THROWS(RunConfig::from_json(bad));
  bad = j;
  bad["diffusion"]["T"] = -1;
  CHECK_THROWS(RunConfig::from_json(bad));
  CHECK(RunConfig::from_json(json::object()).name == "run");
}

TEST_CASE("untrained denoise run keeps outputs inside the observed graph") {
  auto root = scratch_dir("pipe_denoise");
  auto res = run_pipeline(toy_config("d0", EditTask::denoise, 0), root);
  const auto observed = load_edges(res.dir / "observed.edges");
  int files = 0;
  for (const auto& f : fs::directory_iterator(res.dir / "edits")) {
    CHECK(edge_difference(load_edges(f.path()), observed).empty());
    ++files;
  }
  CHECK(files == 3);
  CHECK(res.report["metrics"]["task"] == "denoise");
}

TEST_CASE("toy run writes every artifact and reproduces report.json bitwise") {
  auto root = scratch_dir("pipe_toy");
  auto cfg = toy_config("toy", EditTask::expand, 20);
  auto a = run_pipeline(cfg, root / "a");
  auto b = run_pipeline(cfg, root / "b");
  for (const char* f : {"config.json", "target.edges", "observed.edges", "missing.edges", "added.edges",
                        "samples.json", "model.json", "loss.csv", "report.json"}) {
    CHECK(fs::exists(a.dir / f));
  }
  CHECK(read_file(a.dir / "report.json") == read_file(b.dir / "report.json"));
  const auto& m = a.report["metrics"];
  for (const char* key : {"consensus", "diversity", "sparsity", "edge_overlap"}) {
    INFO(key);
    CHECK(m[key].is_number());
  }
  CHECK(m["edge_overlap"].get<double>() == 1.0);
  // loss log has a header plus one row per step
  std::ifstream log(a.dir / "loss.csv");
  std::string line;
  int rows = 0;
  while (std::getline(log, line)) ++rows;
  CHECK(rows == 21);
}

TEST_CASE("style run trains a regressor and reports distances") {
  auto root = scratch_dir("pipe_style");
  auto cfg = toy_config("s", EditTask::style, 5);
  cfg.edit.regressor.steps = 5;
  cfg.edit.max_regions = 2;
  cfg.edit.R = 2;
  auto res = run_pipeline(cfg, root);
  CHECK(fs::exists(res.dir / "regressor.json"));
  CHECK(res.report["style"]["unguided_distance"].get<double>() == doctest::Approx(3.0));
  CHECK(res.report["style"]["subgraphs"].size() == 2);
}

TEST_CASE("stage errors name the stage and keep earlier artifacts") {
  auto root = scratch_dir("pipe_fail");
  RunConfig c = toy_config("f", EditTask::expand, 0);
  c.dataset.kind = "edges";
  c.dataset.path = (root / "nope.edges").string();
  try {
    run_pipeline(c, root);
    FAIL("expected StageError");
  } catch (const StageError& e) {
    CHECK(e.stage() == "dataset");
  }
  CHECK(fs::exists(root / "f" / "config.json"));
  c = toy_config("g", EditTask::expand, 0);
  c.corruption.add_pool = "motif";
  c.dataset.kind = "edges";
  c.dataset.path = (data_dir() / "cora.edges").string();
  try {
    run_pipeline(c, root);
    FAIL("expected StageError");
  } catch (const StageError& e) {
    CHECK(e.stage() == "corrupt");
  }
}

TEST_CASE("edit regions cover their pairs and assemble back") {
  auto root = scratch_dir("pipe_regions");
  const Graph g = barabasi_albert(60, 2, 4);
  const auto c = global_context(g, 2);
  const EdgeList pairs{{0, 1}, {0, 2}, {10, 50}};
  auto regions = build_edit_regions(g, c, pairs, 1, 8, 3);
  std::size_t covered = 0;
  for (const auto& r : regions) {
    CHECK(r.sub.size() <= 8);
    for (const auto& e : r.pairs) {
      CHECK(std::binary_search(r.sub.parent_ids.begin(), r.sub.parent_ids.end(), e.u));
      CHECK(std::binary_search(r.sub.parent_ids.begin(), r.sub.parent_ids.end(), e.v));
      ++covered;
    }
  }
  CHECK(covered == 3);
  CHECK(build_edit_regions(g, c, pairs, 1, 8, 3, 1).size() == 1);
  // Handing back each region's own graph reproduces the observed graph.
  std::vector<const Graph*> same;
  for (const auto& r : regions) same.push_back(&r.sub.graph);
  CHECK(assemble_sample(g, regions, same).edges() == g.edges());
  // Emptying every region removes exactly the region-owned edges.
  std::vector<Graph> empties;
  for (const auto& r : regions) empties.emplace_back(r.sub.size());
  std::vector<const Graph*> ptrs;
  for (const auto& e : empties) ptrs.push_back(&e);
  const Graph cleared = assemble_sample(g, regions, ptrs);
  CHECK(random_removal_baseline(g, regions, {cleared}, pairs) == doctest::Approx(1.0));
  CHECK(random_removal_baseline(g, regions, {g}, pairs) == 0.0);
}

TEST_CASE("plot data: one run, three runs, empty directory") {
  auto root = scratch_dir("plot");
  auto one = run_pipeline(toy_config("r1", EditTask::denoise, 0), root / "single");
  auto files = emit_plot_data(one.dir, root / "csv1");
  CHECK(files.size() == 4);
  for (const auto& f : files) {
    std::ifstream in(f);
    std::string header, row, extra;
    std::getline(in, header);
    std::getline(in, row);
    CHECK_FALSE(std::getline(in, extra));
    CHECK(row.rfind("r1,", 0) == 0);
  }
  for (const char* name : {"c", "a", "b"}) run_pipeline(toy_config(name, EditTask::denoise, 0), root / "many");
  files = emit_plot_data(root / "many", root / "csv3");
  std::ifstream in(root / "csv3" / "sparsity.csv");
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == "run_id,sparsity");
  CHECK(lines[1].rfind("a,", 0) == 0);
  CHECK(lines[2].rfind("b,", 0) == 0);
  CHECK(lines[3].rfind("c,", 0) == 0);
  fs::create_directories(root / "empty");
  CHECK_THROWS_WITH(emit_plot_data(root / "empty", root / "csv0"), doctest::Contains("report.json"));
}

TEST_CASE("CLI exit codes") {
  auto root = scratch_dir("cli");
  CHECK(run_cli("") == 1);
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("corrupt --frac 2") == 1);
  CHECK(run_cli("bogus") == 1);
  CHECK(run_cli("corrupt --input " + (root / "missing.edges").string() + " --out " + root.string()) == 2);
  CHECK(run_cli("corrupt") == 1);
  CHECK(run_cli("plot-data --runs " + root.string()) == 2);
}

TEST_CASE("CLI chain with the default output root") {
  auto root = scratch_dir("cli_chain");
  const std::string env = "SUBDIFF_OUTPUT_ROOT=" + root.string();
  REQUIRE(run_cli("corrupt --ba-shapes --n-base 40 --ba-m 2 --motifs 4 --mode remove --frac 0.05 --seed 3", env) == 0);
  const fs::path run = root / "corrupt";
  CHECK(fs::exists(run / "observed.edges"));
  const std::string obs = (run / "observed.edges").string();
  REQUIRE(run_cli("sample --input " + obs + " --hops 1 --nmax 12 --out " + (root / "samples").string()) == 0);
  CHECK(fs::exists(root / "samples" / "manifest.json"));
  const std::string model = (root / "model.json").string();
  REQUIRE(run_cli("train --input " + obs + " --hops 1 --nmax 12 --T 5 --steps 3 --layers 1 --hidden 8 --out " + model +
                  " --regressor-out " + (root / "reg.json").string() + " --regressor-steps 3") == 0);
  CHECK(fs::exists(root / "model.loss.csv"));
  const std::string sub = (root / "samples" / "sub_00005.edges").string();
  CHECK(run_cli("edit --task expand --subgraph " + sub + " --model " + model + " --rounds 2 --out " +
                (root / "edits").string()) == 0);
  CHECK(fs::exists(root / "edits" / "sample_01.edges"));
  CHECK(run_cli("edit --task style --subgraph " + sub + " --model " + model) == 1);
  CHECK(run_cli("edit --task style --subgraph " + sub + " --model " + model + " --regressor " +
                (root / "reg.json").string() + " --target 20 --rounds 2 --out " + (root / "style").string()) == 0);
  CHECK(run_cli("eval --samples " + (root / "samples").string() + " --observed " + obs + " --target " +
                (run / "target.edges").string() + " --edit-set " + (run / "missing.edges").string() + " --out " +
                (root / "report.json").string()) == 0);
  CHECK(json::parse(read_file(root / "report.json")).contains("consensus"));
  CHECK(run_cli("stats --input " + obs) == 0);
  CHECK(run_cli("stitch --model " + model + " --reference " + obs + " --out " + (root / "gen.edges").string()) == 0);
  CHECK(fs::exists(root / "gen.edges"));
}

}  // TEST_SUITE
