#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "subdiff/datasets.hpp"
#include "subdiff/diffusion.hpp"
#include "subdiff/edit.hpp"
#include "subdiff/metrics.hpp"

namespace subdiff {

struct DatasetConfig {
  std::string kind{"ba_shapes"};  ///< "edges" or "ba_shapes"
  std::string path;               ///< edge list for kind = edges (relative to the config file)
  std::string labels;             ///< optional label CSV for kind = edges
  bool largest_component{true};
  BaShapesParams ba;
  std::string motif_edges{"all"};  ///< "all" or "roof": the pool for motif-mode corruption
};

struct CorruptionConfig {
  CorruptionSpec spec;
  std::string add_pool{"any"};  ///< "any" or "motif" (house chords, BA-Shapes only)
};

struct SamplingConfig {
  int hops{2};
  std::size_t n_max{50};
  std::uint64_t seed{0};
  int context_dim{2};
};

struct EditConfig {
  EditTask task{EditTask::expand};
  int R{10};
  std::uint64_t seed{0};
  int region_hops{1};
  std::size_t max_regions{0};  ///< 0 keeps one region per edit pair
  // Style transfer only.
  StyleAttr attr{StyleAttr::sum_degree};
  double target_delta{3.0};
  double lambda{100.0};
  RegressorConfig regressor;
};

/// Everything a run needs; every random process draws from one of the named seeds.
struct RunConfig {
  std::string name{"run"};
  DatasetConfig dataset;
  CorruptionConfig corruption;
  SamplingConfig sampling;
  TrainConfig diffusion;
  EditConfig edit;
  std::string output_dir;  ///< empty: <output root>/<name>

  nlohmann::json to_json() const;
  /// Unknown keys anywhere are rejected; missing keys take defaults.
  static RunConfig from_json(const nlohmann::json& j);
};

/// Stage failure: carries the stage name for diagnostics and exit codes.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

struct Dataset {
  Graph graph;
  EdgeList motif_edges;  ///< pool for motif-mode corruption
  EdgeList chord_pool;   ///< house chords (BA-Shapes only)
};

Dataset load_dataset(const DatasetConfig& cfg, const std::filesystem::path& base_dir = {});

/// Node set edited together; `graph`/`context` are induced from G_O.
struct EditRegion {
  Subgraph sub;
  std::vector<Edge> pairs;  ///< the edit pairs this region was built for
};

/// One region per edit pair: the union of the pair's `hops`-hop ego nets in
/// G_O. Oversized regions keep both endpoints, then their neighbours, then a
/// uniform fill up to n_max. Pairs already inside an earlier region reuse it.
std::vector<EditRegion> build_edit_regions(const Graph& observed, const Eigen::MatrixXd& context,
                                           const EdgeList& edit_pairs, int hops, std::size_t n_max,
                                           std::uint64_t seed, std::size_t max_regions = 0);

/// Full-graph sample: G_O with every pair owned by a region set by that region's sample.
/// A pair belongs to the first region holding both endpoints.
Graph assemble_sample(const Graph& observed, const std::vector<EditRegion>& regions,
                      const std::vector<const Graph*>& region_samples);

/// Expected consensus on E_A of removing, uniformly from the region-owned
/// observed edges, as many edges as each sample removed.
double random_removal_baseline(const Graph& observed, const std::vector<EditRegion>& regions,
                               const std::vector<Graph>& samples, const EdgeList& added_edges);

struct RunResult {
  std::filesystem::path dir;
  nlohmann::json report;
};

/// Runs corrupt, sample, train, edit and eval, writing every artifact
/// atomically under the run directory.
RunResult run_pipeline(const RunConfig& config, const std::filesystem::path& output_root,
                       const std::filesystem::path& base_dir = {});

/// One CSV per metric over every report.json found in `runs_dir` (itself or
/// its immediate subdirectories), rows sorted by run id.
std::vector<std::filesystem::path> emit_plot_data(const std::filesystem::path& runs_dir,
                                                  const std::filesystem::path& out_dir);

/// $SUBDIFF_OUTPUT_ROOT, or "subdiff-out" when unset.
std::filesystem::path default_output_root();

}  // namespace subdiff
