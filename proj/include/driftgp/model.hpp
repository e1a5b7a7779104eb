// Copyright 2026 The driftgp Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DRIFTGP_MODEL_HPP
#define DRIFTGP_MODEL_HPP

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "driftgp/drift.hpp"
#include "driftgp/gp.hpp"
#include "driftgp/kernel.hpp"
#include "driftgp/optimizer.hpp"

namespace driftgp {

struct ModelConfig {
  int max_inducing = 100;
  // Decay rate for inducing scores; nullopt disables decay.
  std::optional<double> gamma = 0.99;
  // Kernel name, or "auto" to take the pool's best without an incumbent.
  std::string initial_kernel = "auto";
  double ik_threshold = 0.01;
  std::vector<std::string> kernel_pool = {"RBF", "Matern52", "RationalQuadratic", "Polynomial",
                                          "Periodic"};
  double uncertainty_threshold = 0.001;
  double zeta = 0.005;
  int initial_batch_size = 50;
  double rho = 0.006;
  KpiKind kpi = KpiKind::kR2;
  int window_lb = 10;
  int window_ub = 50;
  // N and K of the window sizing rule: recent points covered by the window
  // and the expected increment size.
  long window_points = 12400;
  long increment_size = 20;
  double val_fraction = 0.2;
  HyperoptSettings hyperopt;

  // Throws InputError on violated invariants.
  void validate() const;
};

struct BatchSplit {
  Eigen::MatrixXd X_tr;
  Eigen::VectorXd y_tr;
  Eigen::MatrixXd X_vl;
  Eigen::VectorXd y_vl;
};

// Temporal split: the first ceil((1 - val_fraction) n) rows train, the rest
// validate. An empty validation part falls back to the training rows.
BatchSplit split_batch(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double val_fraction);

struct KernelChoice {
  KernelSpec spec;
  HyperparamVector params;
  // Validation KPI of the chosen kernel (config.kpi); NaN when undefined.
  double kpi = 0.0;
  // Per-candidate validation KPI, pool order.
  std::vector<double> candidate_kpis;
};

struct Incumbent {
  KernelSpec spec;
  HyperparamVector params;
};

// Fits every pool kernel on the training part and scores it on the validation
// part. The incumbent is kept when its score is within ik_threshold of the
// best. Candidates whose KPI is undefined are ranked by MSE instead.
KernelChoice pick_best_kernel(const Eigen::MatrixXd& X_tr, const Eigen::VectorXd& y_tr,
                              const Eigen::MatrixXd& X_vl, const Eigen::VectorXd& y_vl,
                              const std::optional<Incumbent>& incumbent,
                              const ModelConfig& config);

struct StepReport {
  std::int64_t batch_index = 0;
  // Prequential KPIs on the validation rows, before any adaptation. r2 is NaN
  // when the validation targets are constant.
  double mse = 0.0;
  double r2 = 0.0;
  DriftKind verdict = DriftKind::kNone;
  // Verdict after hyperparameter re-optimization, when it ran.
  std::optional<DriftKind> verdict_after_hyperopt;
  bool hyperopt_ran = false;
  bool kernel_reselected = false;
  bool kernel_switched = false;
  std::string active_kernel;
  int inducing_count = 0;
  int absorbed_count = 0;
  std::int64_t step_micros = 0;
  // Validation targets and the prequential predictions behind mse / r2.
  std::vector<double> val_targets;
  std::vector<double> val_predictions;
  // Set when the step failed and the model was rolled back.
  std::optional<std::string> error;
};

// Drift-aware online sparse GP regressor. update() must be called from one
// thread in stream order; predict() reads an immutable published snapshot and
// may run concurrently with update().
class DaoModel {
 public:
  // Splits the base batch, selects the kernel, builds the GP state and seeds
  // the KPI window. Throws InputError when X has fewer than
  // initial_batch_size rows.
  DaoModel(ModelConfig config, const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

  DaoModel(const DaoModel& other);
  DaoModel& operator=(const DaoModel& other);

  // Processes one mini-batch. Numerical failures roll the model back to its
  // pre-batch state and are reported through StepReport::error.
  StepReport update(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

  Posterior predict(const Eigen::MatrixXd& X_query) const;

  const ModelConfig& config() const noexcept { return config_; }
  // Current state; only safe on the thread that calls update().
  const GPState& state() const noexcept { return *state_; }
  // Immutable snapshot, safe from any thread.
  std::shared_ptr<const GPState> snapshot() const;
  const KpiWindow& window() const noexcept { return window_; }
  std::int64_t batch_index() const noexcept { return batch_index_; }
  // Validation KPI of the initial kernel selection.
  double initial_kpi() const noexcept { return initial_kpi_; }

  // Bit-level equality of everything update() mutates.
  bool same_state(const DaoModel& other) const;

 private:
  StepReport step(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

  ModelConfig config_;
  // Never mutated in place: update() builds a new state and swaps the pointer
  // on success, which is also what makes rollback free.
  std::shared_ptr<const GPState> state_;
  KpiWindow window_;
  std::int64_t batch_index_ = 0;
  double initial_kpi_ = 0.0;
  mutable std::mutex state_mutex_;
};

}  // namespace driftgp

#endif  // DRIFTGP_MODEL_HPP
