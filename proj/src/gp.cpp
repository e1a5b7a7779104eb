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

#include "driftgp/gp.hpp"

#include <cmath>
#include <numbers>

#include "driftgp/error.hpp"

namespace driftgp {

namespace {

const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

bool factor_ok(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  if (llt.info() != Eigen::Success) return false;
  const auto diag = llt.matrixLLT().diagonal();
  return diag.allFinite() && (diag.array() > 0.0).all();
}

void check_training_set(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (X.rows() == 0) throw InputError("training set is empty");
  if (X.rows() != y.size()) throw InputError("X and y have different lengths");
}

}  // namespace

JitteredCholesky jittered_cholesky(const Eigen::MatrixXd& G) {
  JitteredCholesky out;
  out.llt.compute(G);
  if (factor_ok(out.llt)) return out;
  const Eigen::Index n = G.rows();
  for (double jitter = kJitterStart; jitter <= kJitterMax * 1.0000001; jitter *= 10.0) {
    out.llt.compute(G + jitter * Eigen::MatrixXd::Identity(n, n));
    if (factor_ok(out.llt)) {
      out.jitter = jitter;
      return out;
    }
  }
  throw NumericalError("Cholesky failed at maximum jitter");
}

GPState make_state(KernelSpec spec, HyperparamVector params, Eigen::MatrixXd X,
                   Eigen::VectorXd y, std::vector<std::int64_t> t) {
  check_training_set(X, y);
  if (t.size() != static_cast<std::size_t>(X.rows())) {
    throw InputError("timestamps not aligned with X");
  }
  GPState state{std::move(spec), std::move(params), std::move(X), std::move(y),
                std::move(t),    {},                {},           0.0};
  return refresh_inverse(std::move(state));
}

GPState refresh_inverse(GPState state) {
  if (state.size() == 0) throw StateError("cannot refresh an empty GP state");
  const Eigen::MatrixXd G = gram(state.spec, state.params, state.X);
  const Eigen::Index m = G.rows();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(m, m);

  // A factorization can succeed while the explicit inverse is still too
  // inaccurate, so the residual also drives the escalation.
  double jitter = 0.0;
  for (;;) {
    Eigen::MatrixXd K = G;
    K.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(K);
    if (factor_ok(llt)) {
      Eigen::MatrixXd K_inv = llt.solve(I);
      K_inv = 0.5 * (K_inv + K_inv.transpose()).eval();
      const double residual = (K * K_inv - I).cwiseAbs().maxCoeff();
      if (K_inv.allFinite() && residual <= kInverseTolerance) {
        state.K = std::move(K);
        state.K_inv = std::move(K_inv);
        state.jitter = jitter;
        return state;
      }
    }
    if (jitter >= kJitterMax) break;
    jitter = jitter == 0.0 ? kJitterStart : std::min(jitter * 10.0, kJitterMax);
  }
  throw NumericalError("Gram matrix singular at maximum jitter");
}

Posterior posterior(const GPState& state, const Eigen::MatrixXd& X_query) {
  if (state.size() == 0) throw StateError("GP model is not initialized (empty base set)");
  const Eigen::MatrixXd Ks = eval_cross(state.spec, state.params, state.X, X_query);
  const Eigen::VectorXd kss = eval_diag(state.spec, state.params, X_query);
  const Eigen::VectorXd alpha = state.K_inv * state.y;
  const Eigen::MatrixXd V = state.K_inv * Ks;

  Posterior post;
  post.mean = Ks.transpose() * alpha;
  post.variance = kss - Ks.cwiseProduct(V).colwise().sum().transpose();
  post.variance = post.variance.cwiseMax(0.0);
  return post;
}

double nlml(const KernelSpec& spec, const HyperparamVector& params,
            const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  check_training_set(X, y);
  const auto chol = jittered_cholesky(gram(spec, params, X));
  const Eigen::VectorXd alpha = chol.llt.solve(y);
  const double log_det_half = chol.llt.matrixLLT().diagonal().array().log().sum();
  const double value = 0.5 * y.dot(alpha) + log_det_half +
                       static_cast<double>(y.size()) * kHalfLog2Pi;
  if (!std::isfinite(value)) throw NumericalError("NLML is not finite");
  return value;
}

NlmlWithGradient nlml_with_gradient(const KernelSpec& spec, const HyperparamVector& params,
                                    const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  check_training_set(X, y);
  const auto chol = jittered_cholesky(gram(spec, params, X));
  const Eigen::Index n = y.size();
  const Eigen::VectorXd alpha = chol.llt.solve(y);
  const Eigen::MatrixXd K_inv = chol.llt.solve(Eigen::MatrixXd::Identity(n, n));

  NlmlWithGradient out;
  out.value = 0.5 * y.dot(alpha) + chol.llt.matrixLLT().diagonal().array().log().sum() +
              static_cast<double>(n) * kHalfLog2Pi;
  if (!std::isfinite(out.value)) throw NumericalError("NLML is not finite");

  const Eigen::MatrixXd W = K_inv - alpha * alpha.transpose();
  const auto grads = gram_gradients(spec, params, X);
  out.gradient.resize(static_cast<Eigen::Index>(grads.size()));
  for (std::size_t k = 0; k < grads.size(); ++k) {
    out.gradient[static_cast<Eigen::Index>(k)] = 0.5 * W.cwiseProduct(grads[k]).sum();
  }
  return out;
}

Eigen::MatrixXd woodbury_expand(const Eigen::MatrixXd& K_inv, const Eigen::VectorXd& k,
                                double c) {
  const Eigen::Index m = K_inv.rows();
  if (K_inv.cols() != m || k.size() != m) throw InputError("woodbury_expand: shape mismatch");

  const Eigen::VectorXd a = K_inv * k;
  const double denom = c - k.dot(a);
  if (!(denom > kWoodburyEpsilon)) {
    throw StabilityError("rank-one expansion denominator below stability floor");
  }
  const double beta = 1.0 / denom;

  Eigen::MatrixXd out(m + 1, m + 1);
  out.topLeftCorner(m, m) = K_inv + beta * a * a.transpose();
  out.topRightCorner(m, 1) = -beta * a;
  out.bottomLeftCorner(1, m) = -beta * a.transpose();
  out(m, m) = beta;
  return out;
}

GPState append_point(GPState state, const Eigen::RowVectorXd& x, double y,
                     std::int64_t t) {
  const Eigen::Index m = state.size();
  const Eigen::MatrixXd xm = x;
  const Eigen::VectorXd k = eval_cross(state.spec, state.params, state.X, xm).col(0);
  const double c = eval_diag(state.spec, state.params, xm)[0] + state.diagonal_noise();

  state.X.conservativeResize(m + 1, Eigen::NoChange);
  state.X.row(m) = x;
  state.y.conservativeResize(m + 1);
  state.y[m] = y;
  state.t.push_back(t);

  try {
    Eigen::MatrixXd K_inv = woodbury_expand(state.K_inv, k, c);
    state.K.conservativeResize(m + 1, m + 1);
    state.K.topRightCorner(m, 1) = k;
    state.K.bottomLeftCorner(1, m) = k.transpose();
    state.K(m, m) = c;
    state.K_inv = std::move(K_inv);
    return state;
  } catch (const StabilityError&) {
    return refresh_inverse(std::move(state));
  }
}

double inverse_residual(const GPState& state) {
  const Eigen::Index m = state.size();
  return (state.K * state.K_inv - Eigen::MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff();
}

}  // namespace driftgp
