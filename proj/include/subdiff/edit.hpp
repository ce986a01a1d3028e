#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "subdiff/diffusion.hpp"

namespace subdiff {

enum class EditTask { expand, denoise, style };
EditTask parse_edit_task(const std::string& s);
std::string to_string(EditTask t);

enum class StyleAttr { sum_degree, max_degree, triangles };
StyleAttr parse_style_attr(const std::string& s);
std::string to_string(StyleAttr a);

/// sum_degree counts both edge orientations (2|E|).
double attribute_value(const Graph& g, StyleAttr attr);

enum class RegressorArch { mp, mp_sum, attn };
RegressorArch parse_regressor_arch(const std::string& s);
std::string to_string(RegressorArch a);

struct RegressorConfig {
  RegressorArch arch{RegressorArch::mp};
  StyleAttr attr{StyleAttr::sum_degree};
  int layers{2};
  int hidden{32};
  int time_dim{16};
  long steps{1000};
  int batch{8};
  double lr{1e-3};
  std::uint64_t seed{0};
};

struct Regressor {
  RegressorConfig config;
  int T{0};
  std::size_t n_max{50};
  double y_mean{0.0};
  double y_std{1.0};
  ParamSet params;
};

ParamSet init_regressor(const RegressorConfig& cfg, std::uint64_t seed);

/// Standardized prediction (1x1) from a relaxed adjacency `a` (may be a tape
/// variable) and the state's local context, which is treated as a constant.
ad::Var regressor_forward(ad::Tape& tape, const std::map<std::string, ad::Var>& vars, const RegressorConfig& cfg,
                          ad::Var a, const Eigen::MatrixXd& Q, int t, int T);

/// Prediction in attribute units.
double regressor_predict(const Regressor& reg, const DiffusionState& state);

/// Batch-mean squared error on standardized targets and its parameter gradient.
double regressor_loss_and_grad(const Regressor& reg, const std::vector<Example>& batch, ParamSet* grad);

/// Fits f(state_t, t) to the clean attribute of noisy states drawn with the
/// model's own forward process.
Regressor train_regressor(const std::vector<Subgraph>& data, const DiffusionModel& model, const RegressorConfig& cfg,
                          const LossCallback& on_step = {});

/// d/dA_ij of ((f(A) - y) / y_std)^2 along symmetric perturbations, zero diagonal.
Eigen::MatrixXd guidance_gradient(const Regressor& reg, const DiffusionState& state, double target);

/// Reweights present-state probabilities by exp(-lambda * g) in log space and renormalizes per pair.
void apply_guidance(Eigen::MatrixXd& present_prob, const Eigen::MatrixXd& g, double lambda);

nlohmann::json regressor_to_json(const Regressor& r);
Regressor regressor_from_json(const nlohmann::json& j);

/// Called after every reverse step (after masking) with (sample index, state).
using EditObserver = std::function<void(int, const DiffusionState&)>;

struct EditRequest {
  Subgraph observed;
  EditTask task{EditTask::expand};
  int R{10};
  std::uint64_t seed{0};
  // Style transfer only.
  double target{0.0};
  double lambda{100.0};
  const Regressor* regressor{nullptr};
};

/// In-painting: observed edges and labels are forced back after every step, so E_O is contained in every sample.
std::vector<Graph> expand(const EditRequest& req, const DiffusionModel& model, const EditObserver& observe = {});
/// Intersection mask: pairs outside E_O are forced absent after every step.
std::vector<Graph> denoise(const EditRequest& req, const DiffusionModel& model, const EditObserver& observe = {});
/// Regressor-guided reverse sampling, one graph per sample index (R of them).
std::vector<Graph> style_transfer(const EditRequest& req, const DiffusionModel& model,
                                  const EditObserver& observe = {});
/// Dispatch on req.task.
std::vector<Graph> run_edit(const EditRequest& req, const DiffusionModel& model, const EditObserver& observe = {});

}  // namespace subdiff
