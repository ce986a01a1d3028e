#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "subdiff/autodiff.hpp"
#include "subdiff/graph.hpp"
#include "subdiff/rng.hpp"
#include "subdiff/subgraph.hpp"

namespace subdiff {

/// Cosine schedule over T steps, offset s = 0.008, rescaled so alpha_bar(0) = 1.
struct NoiseSchedule {
  int T{0};
  std::vector<double> alpha_bar;  ///< T + 1 entries

  static NoiseSchedule cosine(int T);
  /// One-step retention alpha_bar(t) / alpha_bar(t - 1), t >= 1.
  double alpha(int t) const;
};

enum class TransitionKind { marginal, absorbing };
TransitionKind parse_transition_kind(const std::string& s);
std::string to_string(TransitionKind k);

/// Reference distributions the forward kernel decays toward.
struct TransitionModel {
  TransitionKind kind{TransitionKind::marginal};
  Eigen::Vector2d m_edge{0.5, 0.5};  ///< (absent, present)
  Eigen::VectorXd m_node;            ///< empty when labels are unused

  /// Marginal: empirical pair density (and label frequencies). Absorbing: all
  /// edge mass on "absent"; labels still use their empirical marginal.
  static TransitionModel fit(TransitionKind kind, const std::vector<Subgraph>& data, int num_classes);

  /// Qbar = a I + (1 - a) 1 m^T for retention a.
  Eigen::Matrix2d edge_kernel(double a) const;
  Eigen::MatrixXd node_kernel(double a) const;
};

struct DiffusionState {
  int t{0};
  Eigen::MatrixXd A;        ///< symmetric 0/1, zero diagonal
  std::vector<int> labels;  ///< empty when labels are unused
  Eigen::MatrixXd C;        ///< fixed global-context rows
  Eigen::MatrixXd Q;        ///< local context of A at time t

  std::size_t size() const noexcept { return static_cast<std::size_t>(A.rows()); }
};

/// Draws every unordered pair (and label) from row Qbar_t[state0].
DiffusionState forward_sample(const Subgraph& s0, int t, const NoiseSchedule& schedule,
                              const TransitionModel& transition, std::size_t n_max, bool use_labels,
                              Rng& rng);

/// Per-pair distribution over x_{t-1} given x_t and predicted clean
/// probabilities p0_hat (present-state probability per pair). Returns the
/// present-state probability per pair; the absent state gets the rest.
Eigen::MatrixXd posterior_edges(const Eigen::MatrixXd& A_t, const Eigen::MatrixXd& p0_present, int t,
                                const NoiseSchedule& schedule, const TransitionModel& transition);

/// Same for node labels: rows of the result sum to 1.
Eigen::MatrixXd posterior_nodes(const std::vector<int>& x_t, const Eigen::MatrixXd& p0, int t,
                                const NoiseSchedule& schedule, const TransitionModel& transition);

/// Single-pair posterior over {absent, present}. Throws if p0 does not sum to 1.
Eigen::Vector2d posterior_pair(int e_t, const Eigen::Vector2d& p0, int t, const NoiseSchedule& schedule,
                               const TransitionModel& transition);

struct DenoiserConfig {
  int layers{4};
  int hidden{64};
  int edge_channels{4};
  int pair_dim{16};
  int time_dim{16};
  int context_dim{2};
  int num_classes{0};  ///< 0 disables the label channel
  std::size_t n_max{50};
};

/// Named parameter matrices, ordered by name.
using ParamSet = std::map<std::string, Eigen::MatrixXd>;

ParamSet init_denoiser(const DenoiserConfig& cfg, std::uint64_t seed);

/// Sinusoidal embedding of t/T, 1 x dim.
Eigen::RowVectorXd time_embedding(double frac, int dim);

struct DenoiserOutput {
  ad::Var edge0;  ///< n x n logits for "absent"
  ad::Var edge1;  ///< n x n logits for "present"
  ad::Var node;   ///< n x K logits (invalid id when K = 0)
};

/// Records the denoiser forward pass on `tape`. `vars` maps parameter names
/// to their tape handles.
DenoiserOutput denoiser_forward(ad::Tape& tape, const std::map<std::string, ad::Var>& vars,
                                const DenoiserConfig& cfg, const DiffusionState& state, int T);

/// Plain-value evaluation; edge logits are n x n per state, node logits n x K.
struct Logits {
  Eigen::MatrixXd edge0;
  Eigen::MatrixXd edge1;
  Eigen::MatrixXd node;
};
Logits denoiser_apply(const ParamSet& params, const DenoiserConfig& cfg, const DiffusionState& state, int T);

/// Mean clean-state cross-entropy over pairs i < j, plus the node term when labels are used.
ad::Var denoiser_loss(const DenoiserOutput& out, const Subgraph& clean, bool use_labels);

struct Example {
  const Subgraph* clean;
  DiffusionState noisy;
};

/// Batch-mean loss and its gradient for every parameter.
double loss_and_grad(const ParamSet& params, const DenoiserConfig& cfg, const std::vector<Example>& batch,
                     int T, bool use_labels, ParamSet* grad);

struct Adam {
  double lr{1e-3};
  double beta1{0.9};
  double beta2{0.999};
  double eps{1e-8};
  double clip{5.0};  ///< global gradient-norm clip, <= 0 disables
  ParamSet m;
  ParamSet v;
  long step{0};

  void update(ParamSet& params, const ParamSet& grad);
};

struct TrainConfig {
  int T{500};
  DenoiserConfig net;
  long steps{2000};
  int batch{8};
  double lr{1e-3};
  std::uint64_t seed{0};
  TransitionKind transition{TransitionKind::marginal};
  bool use_labels{false};
};

struct DiffusionModel {
  TrainConfig config;
  NoiseSchedule schedule;
  TransitionModel transition;
  ParamSet params;
  Histograms histograms;
};

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Called after each step with (step, loss).
using LossCallback = std::function<void(long, double)>;

DiffusionModel train(const std::vector<Subgraph>& data, const TrainConfig& config,
                     const LossCallback& on_step = {});

/// Hook run on the freshly sampled state after every reverse step (masks).
using StepHook = std::function<void(DiffusionState&)>;
/// Hook that may reweight the per-pair present-state probabilities before sampling.
using GuidanceHook = std::function<void(const DiffusionState&, Eigen::MatrixXd& present_prob)>;

struct ReverseOptions {
  StepHook after_step;  ///< also applied once to the t = T draw
  GuidanceHook guidance;
};

/// Reverse process from the reference distribution down to t = 0.
DiffusionState reverse_sample(const DiffusionModel& model, std::size_t n, const Eigen::MatrixXd& C, Rng& rng,
                              const ReverseOptions& options = {});

/// Draw from the reference distribution (the t = T prior).
DiffusionState sample_prior(const TransitionModel& transition, std::size_t n, bool use_labels, Rng& rng);

/// Sample a symmetric 0/1 matrix with independent per-pair present probabilities.
Eigen::MatrixXd sample_pairs(const Eigen::MatrixXd& present_prob, Rng& rng);

/// Graph of the state; labels carried with at least `num_classes` classes.
Graph state_graph(const DiffusionState& s, int num_classes = 0);

}  // namespace subdiff
