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

#ifndef DRIFTGP_GP_HPP
#define DRIFTGP_GP_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "driftgp/kernel.hpp"

namespace driftgp {

// Stability floor for the rank-one expansion denominator c - k^T K^{-1} k.
inline constexpr double kWoodburyEpsilon = 1e-10;
// Largest tolerated max-abs entry of K * K_inv - I.
inline constexpr double kInverseTolerance = 1e-6;
inline constexpr double kJitterStart = 1e-10;
inline constexpr double kJitterMax = 1e-4;

// Base training set plus the noise-inclusive Gram matrix and its explicit
// inverse. `jitter` is the diagonal regularizer folded into K when the plain
// Gram matrix was not numerically positive definite.
struct GPState {
  KernelSpec spec;
  HyperparamVector params;
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  std::vector<std::int64_t> t;
  Eigen::MatrixXd K;
  Eigen::MatrixXd K_inv;
  double jitter = 0.0;

  Eigen::Index size() const noexcept { return X.rows(); }
  // Effective diagonal noise: noise variance plus jitter.
  double diagonal_noise() const { return params.noise() + jitter; }
};

struct Posterior {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
};

// Cholesky factor of G + jitter * I, escalating jitter from 0 through
// kJitterStart by factors of 10 up to kJitterMax. Throws NumericalError when
// every attempt fails.
struct JitteredCholesky {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = 0.0;
};
JitteredCholesky jittered_cholesky(const Eigen::MatrixXd& G);

// Builds a state and computes K, K_inv through refresh_inverse.
GPState make_state(KernelSpec spec, HyperparamVector params, Eigen::MatrixXd X,
                   Eigen::VectorXd y, std::vector<std::int64_t> t);

// Predictive mean K_s^T K_inv y and latent variance diag(K_ss - K_s^T K_inv K_s),
// negative variances clamped to zero.
Posterior posterior(const GPState& state, const Eigen::MatrixXd& X_query);

// Negative log marginal likelihood via Cholesky.
double nlml(const KernelSpec& spec, const HyperparamVector& params,
            const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

struct NlmlWithGradient {
  double value = 0.0;
  // d nlml / d coordinate, coordinates as in gram_gradients.
  Eigen::VectorXd gradient;
};
NlmlWithGradient nlml_with_gradient(const KernelSpec& spec, const HyperparamVector& params,
                                    const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

// Inverse of [[K, k], [k^T, c]] given K_inv:
//   [[K_inv + b a a^T, -b a], [-b a^T, b]],  a = K_inv k,  b = 1 / (c - k^T a).
// Throws StabilityError when c - k^T a <= kWoodburyEpsilon.
Eigen::MatrixXd woodbury_expand(const Eigen::MatrixXd& K_inv, const Eigen::VectorXd& k,
                                double c);

// Recomputes K and K_inv from scratch. The jitter actually used is recorded in
// the state and included in K.
GPState refresh_inverse(GPState state);

// Appends one observation, growing K_inv with woodbury_expand and falling back
// to refresh_inverse when the expansion is unstable.
GPState append_point(GPState state, const Eigen::RowVectorXd& x, double y,
                     std::int64_t t);

// max |K * K_inv - I|.
double inverse_residual(const GPState& state);

}  // namespace driftgp

#endif  // DRIFTGP_GP_HPP
