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

#ifndef DRIFTGP_INDUCING_HPP
#define DRIFTGP_INDUCING_HPP

#include <cstdint>
#include <optional>
#include <span>

#include <Eigen/Core>

#include "driftgp/gp.hpp"

namespace driftgp {

// w_i = exp(-gamma * (t_now - t_i)). An absent gamma switches decay off.
Eigen::VectorXd decay_weights(std::optional<double> gamma, std::span<const std::int64_t> t_base,
                              std::int64_t t_now);

// D^{1/2} K D^{1/2} with D = diag(w).
Eigen::MatrixXd decayed_kernel(const Eigen::MatrixXd& K, const Eigen::VectorXd& w);

// score_i = w_i * v_i, where v_i is the self-prediction variance of base point
// i under the decayed noise-free kernel:
//   v = diag(K_d - K_d (K_d + s I)^{-1} K_d) = s - s^2 diag((K_d + s I)^{-1}),
// with s the state's diagonal noise.
Eigen::VectorXd score_points(const GPState& state, const Eigen::VectorXd& w);

// Keeps the `max_inducing` highest-scoring base points (ties go to the more
// recent point, then the lower index) and rebuilds K, K_inv. States already
// within budget are returned unchanged.
GPState select_inducing(GPState state, int max_inducing, std::optional<double> gamma,
                        std::int64_t t_now);

}  // namespace driftgp

#endif  // DRIFTGP_INDUCING_HPP
