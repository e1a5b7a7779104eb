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

#include "driftgp/inducing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "driftgp/error.hpp"

namespace driftgp {

Eigen::VectorXd decay_weights(std::optional<double> gamma, std::span<const std::int64_t> t_base,
                              std::int64_t t_now) {
  const auto m = static_cast<Eigen::Index>(t_base.size());
  if (!gamma) return Eigen::VectorXd::Ones(m);
  if (*gamma < 0.0) throw InputError("decay rate must be non-negative");
  Eigen::VectorXd w(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto dt = t_now - t_base[static_cast<std::size_t>(i)];
    if (dt < 0) throw InputError("timestamp lies in the future");
    w[i] = std::exp(-*gamma * static_cast<double>(dt));
  }
  return w;
}

Eigen::MatrixXd decayed_kernel(const Eigen::MatrixXd& K, const Eigen::VectorXd& w) {
  if (K.rows() != K.cols() || K.rows() != w.size()) {
    throw InputError("decayed_kernel: shape mismatch");
  }
  const Eigen::VectorXd r = w.cwiseSqrt();
  return r.asDiagonal() * K * r.asDiagonal();
}

Eigen::VectorXd score_points(const GPState& state, const Eigen::VectorXd& w) {
  const Eigen::Index m = state.size();
  if (w.size() != m) throw InputError("score_points: weight vector has wrong length");
  const double s = state.diagonal_noise();
  const Eigen::MatrixXd K = eval_cross(state.spec, state.params, state.X, state.X);
  Eigen::MatrixXd A = decayed_kernel(K, w);
  A.diagonal().array() += s;

  const auto chol = jittered_cholesky(A);
  const Eigen::MatrixXd A_inv = chol.llt.solve(Eigen::MatrixXd::Identity(m, m));
  const double s_eff = s + chol.jitter;
  const Eigen::VectorXd variance =
      (s_eff - s_eff * s_eff * A_inv.diagonal().array()).cwiseMax(0.0).matrix();
  if (!variance.allFinite()) throw NumericalError("non-finite inducing scores");
  return w.cwiseProduct(variance);
}

GPState select_inducing(GPState state, int max_inducing, std::optional<double> gamma,
                        std::int64_t t_now) {
  if (max_inducing < 1) throw InputError("max_inducing must be >= 1");
  const Eigen::Index m = state.size();
  if (m <= max_inducing) return state;

  const Eigen::VectorXd w = decay_weights(gamma, state.t, t_now);
  const Eigen::VectorXd scores = score_points(state, w);

  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    const auto ta = state.t[static_cast<std::size_t>(a)];
    const auto tb = state.t[static_cast<std::size_t>(b)];
    if (ta != tb) return ta > tb;
    return a < b;
  });
  order.resize(static_cast<std::size_t>(max_inducing));
  // Keep the surviving rows in their original relative order.
  std::sort(order.begin(), order.end());

  Eigen::MatrixXd X(max_inducing, state.X.cols());
  Eigen::VectorXd y(max_inducing);
  std::vector<std::int64_t> t(static_cast<std::size_t>(max_inducing));
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto row = static_cast<Eigen::Index>(k);
    X.row(row) = state.X.row(order[k]);
    y[row] = state.y[order[k]];
    t[k] = state.t[static_cast<std::size_t>(order[k])];
  }
  state.X = std::move(X);
  state.y = std::move(y);
  state.t = std::move(t);
  return refresh_inverse(std::move(state));
}

}  // namespace driftgp
