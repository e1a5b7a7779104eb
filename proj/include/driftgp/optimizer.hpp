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

#ifndef DRIFTGP_OPTIMIZER_HPP
#define DRIFTGP_OPTIMIZER_HPP

#include <functional>
#include <string_view>

#include <Eigen/Core>

#include "driftgp/gp.hpp"
#include "driftgp/kernel.hpp"

namespace driftgp {

struct BoxBounds {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  // Throws InputError unless both are finite, equally sized and lower < upper.
  void validate() const;
  Eigen::VectorXd project(Eigen::VectorXd x) const;
};

enum class Termination { kGradientTol, kFunctionTol, kMaxIter, kLineSearchFail };
std::string_view termination_name(Termination t) noexcept;

struct OptimResult {
  Eigen::VectorXd x_star;
  double f_star = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  Termination termination = Termination::kMaxIter;
};

// Value-and-gradient oracle. Writes the gradient into the second argument.
using Objective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct LbfgsbSettings {
  int memory = 10;
  // Max-norm of the projected gradient.
  double gradient_tolerance = 1e-5;
  // Relative decrease between accepted iterates.
  double function_tolerance = 1e-9;
  // Oracle calls, counting every line-search trial. Never exceeded.
  int max_evaluations = 200;
  // Called with every accepted iterate, starting with the projected x0.
  std::function<void(const Eigen::VectorXd&, double)> on_accept;
};

// Limited-memory BFGS with gradient projection onto a box. Every iterate is
// projected onto the bounds and accepted only on sufficient decrease, so the
// accepted sequence is feasible and non-increasing.
OptimResult minimize_bounded(const Objective& objective, const Eigen::VectorXd& x0,
                             const BoxBounds& bounds, const LbfgsbSettings& settings = {});

// Wraps a value-only function with central differences, switching to
// one-sided differences at the box faces.
Objective finite_difference(std::function<double(const Eigen::VectorXd&)> f,
                            const BoxBounds& bounds, double step = 1e-6);

enum class GradientMode { kFiniteDifference, kAnalytic };

struct HyperoptSettings {
  LbfgsbSettings lbfgsb;
  GradientMode gradient = GradientMode::kFiniteDifference;
  double fd_step = 1e-6;
};

// Optimizer coordinates for a hyperparameter vector: log for log-scaled
// descriptors, identity otherwise.
Eigen::VectorXd to_coordinates(const KernelSpec& spec, const HyperparamVector& params);
HyperparamVector from_coordinates(const KernelSpec& spec, const Eigen::VectorXd& coords);
BoxBounds coordinate_bounds(const KernelSpec& spec);

struct HyperoptResult {
  HyperparamVector params;
  OptimResult optim;
  double nlml_before = 0.0;
  double nlml_after = 0.0;
};

// Minimizes nlml over the spec's hyperparameters starting from `start`.
// Returns whichever of {start, optimum} has the lower NLML. Numerical failure
// is reported as converged = false with `start` returned unchanged.
HyperoptResult optimize_hparams(const KernelSpec& spec, const HyperparamVector& start,
                                const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                const HyperoptSettings& settings = {});
HyperoptResult optimize_hparams(const GPState& state, const HyperoptSettings& settings = {});

}  // namespace driftgp

#endif  // DRIFTGP_OPTIMIZER_HPP
