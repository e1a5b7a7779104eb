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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "driftgp/error.hpp"
#include "driftgp/gp.hpp"
#include "oracles.hpp"

using namespace driftgp;

namespace {

HyperparamVector params(std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double e : v) x[i++] = e;
  return HyperparamVector(x);
}

KernelSpec rbf_with_noise_floor(int d, double floor) {
  const KernelSpec base = KernelSpec::make(KernelFamily::kRbfArd, d);
  return KernelSpec(KernelFamily::kRbfArd, d, base.descriptors(),
                    {"noise", 0.1, floor, 10.0, ParamScale::kLinear});
}

std::vector<std::int64_t> zeros(Eigen::Index n) { return std::vector<std::int64_t>(static_cast<std::size_t>(n), 0); }

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("posterior scalar case") {
  const KernelSpec spec = KernelSpec::make(KernelFamily::kRbfArd, 1);
  const GPState s = make_state(spec, params({1.0, 1.0, 1.0}), Eigen::MatrixXd::Zero(1, 1),
                               Eigen::VectorXd::Ones(1), zeros(1));
  const Posterior p = posterior(s, Eigen::MatrixXd::Zero(1, 1));
  CHECK(p.mean[0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(p.variance[0] == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("far query recovers the signal variance") {
  const KernelSpec spec = rbf_with_noise_floor(1, 0.0);
  Eigen::MatrixXd X(3, 1);
  X << -1.0, 0.0, 1.0;
  const GPState s = make_state(spec, params({1.0, 1.7, 0.0}), X, Eigen::Vector3d(1, 2, 3), zeros(3));
  const Posterior p = posterior(s, Eigen::MatrixXd::Constant(1, 1, 12.0));
  CHECK(std::abs(p.variance[0] - 1.7) <= 1e-6);
}

TEST_CASE("posterior matches the dense-solve oracle") {
  std::mt19937_64 gen(1);
  const KernelSpec spec = KernelSpec::make(KernelFamily::kRbfArd, 2);
  const auto p = params({0.8, 1.4, 1.3, 0.05});
  const Eigen::VectorXd ls = Eigen::Vector2d(0.8, 1.4);
  const Eigen::MatrixXd X = oracle::random_matrix(gen, 8, 2, -2, 2);
  const Eigen::VectorXd y = oracle::random_matrix(gen, 8, 1);
  const Eigen::MatrixXd Q = oracle::random_matrix(gen, 4, 2, -2, 2);
  const GPState s = make_state(spec, p, X, y, zeros(8));
  const Posterior got = posterior(s, Q);
  const auto want = oracle::posterior(X, y, Q, 0.05,
                                      [&](const auto& a, const auto& b) { return oracle::rbf(a, b, ls, 1.3); });
  CHECK(max_abs(got.mean - want.mean) <= 1e-8);
  CHECK(max_abs(got.variance - want.variance) <= 1e-8);
}

TEST_CASE("posterior variance vanishes at noise-free training points") {
  std::mt19937_64 gen(2);
  const KernelSpec spec = rbf_with_noise_floor(1, 0.0);
  const Eigen::MatrixXd X = oracle::random_matrix(gen, 6, 1, -3, 3);
  const GPState s = make_state(spec, params({1.0, 1.0, 0.0}), X, oracle::random_matrix(gen, 6, 1), zeros(6));
  const Posterior p = posterior(s, X);
  CHECK(p.variance.maxCoeff() <= 1e-8);
  CHECK(p.variance.minCoeff() >= 0.0);
}

TEST_CASE("posterior on an empty state is an error") {
  const KernelSpec spec = KernelSpec::make(KernelFamily::kRbfArd, 1);
  const GPState empty{spec, spec.initial_params(), Eigen::MatrixXd(0, 1), Eigen::VectorXd(0), {}, {}, {}, 0.0};
  CHECK_THROWS_AS(posterior(empty, Eigen::MatrixXd::Zero(1, 1)), StateError);
}

TEST_CASE("nlml scalar cases") {
  const KernelSpec spec = KernelSpec::make(KernelFamily::kRbfArd, 1);
  const auto p = params({1.0, 0.5, 0.5});
  const Eigen::MatrixXd X = Eigen::MatrixXd::Zero(1, 1);
  CHECK(std::abs(nlml(spec, p, X, Eigen::VectorXd::Zero(1)) - 0.918938533205) <= 1e-9);
  CHECK(std::abs(nlml(spec, p, X, Eigen::VectorXd::Constant(1, 2.0)) - 2.918938533205) <= 1e-9);
}

TEST_CASE("nlml matches the explicit-inverse oracle and is permutation invariant") {
  std::mt19937_64 gen(3);
  const KernelSpec spec = KernelSpec::make(KernelFamily::kMatern52Ard, 2);
  const auto p = params({0.6, 1.9, 0.8, 0.03});
  const Eigen::MatrixXd X = oracle::random_matrix(gen, 6, 2, -2, 2);
  const Eigen::VectorXd y = oracle::random_matrix(gen, 6, 1);
  const double got = nlml(spec, p, X, y);
  CHECK(std::abs(got - oracle::nlml(gram(spec, p, X), y)) <= 1e-8);

  std::vector<int> perm(6);
  std::iota(perm.begin(), perm.end(), 0);
  for (int trial = 0; trial < 5; ++trial) {
    std::shuffle(perm.begin(), perm.end(), gen);
    Eigen::MatrixXd Xp(6, 2);
    Eigen::VectorXd yp(6);
    for (int i = 0; i < 6; ++i) {
      Xp.row(i) = X.row(perm[static_cast<std::size_t>(i)]);
      yp[i] = y[perm[static_cast<std::size_t>(i)]];
    }
    CHECK(std::abs(nlml(spec, p, Xp, yp) - got) <= 1e-10);
  }
}

TEST_CASE("nlml gradient agrees with central differences for every family") {
  std::mt19937_64 gen(4);
  const Eigen::MatrixXd X = oracle::random_matrix(gen, 10, 2, -2, 2);
  const Eigen::VectorXd y = oracle::random_matrix(gen, 10, 1);
  for (const auto& spec : default_pool(2)) {
    auto p = spec.initial_params();
    for (int i = 0; i + 1 < p.size(); ++i) p[i] *= 0.8 + 0.15 * i;
    const auto ng = nlml_with_gradient(spec, p, X, y);
    CHECK(ng.value == doctest::Approx(nlml(spec, p, X, y)).epsilon(1e-12));
    for (int i = 0; i < spec.num_params(); ++i) {
      const bool log = spec.descriptor(i).scale == ParamScale::kLog;
      const double h = 1e-5;
      auto up = p;
      auto down = p;
      if (log) {
        up[i] *= std::exp(h);
        down[i] *= std::exp(-h);
      } else {
        up[i] += h;
        down[i] -= h;
      }
      const double fd = (nlml(spec, up, X, y) - nlml(spec, down, X, y)) / (2 * h);
      CHECK(ng.gradient[i] == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
    }
  }
}

TEST_CASE("woodbury closed-form cases") {
  const Eigen::MatrixXd K_inv = Eigen::MatrixXd::Constant(1, 1, 0.5);
  const Eigen::MatrixXd got = woodbury_expand(K_inv, Eigen::VectorXd::Ones(1), 3.0);
  Eigen::Matrix2d want;
  want << 0.6, -0.2, -0.2, 0.4;
  CHECK(max_abs(got - want) <= 1e-15);

  std::mt19937_64 gen(5);
  const Eigen::MatrixXd S = oracle::random_spd(gen, 4).inverse();
  const Eigen::MatrixXd block = woodbury_expand(S, Eigen::VectorXd::Zero(4), 1.0);
  CHECK(block.topLeftCorner(4, 4) == S);
  CHECK(block.col(4).head(4).isZero(0));
  CHECK(block(4, 4) == 1.0);
}

TEST_CASE("woodbury matches dense inversion") {
  std::mt19937_64 gen(6);
  const Eigen::MatrixXd A = oracle::random_spd(gen, 11);
  const Eigen::MatrixXd inner = A.topLeftCorner(10, 10);
  const Eigen::MatrixXd got = woodbury_expand(inner.inverse(), A.col(10).head(10), A(10, 10));
  CHECK(max_abs(got - A.inverse()) <= 1e-8);
}

TEST_CASE("woodbury rejects a vanishing denominator") {
  const Eigen::MatrixXd K_inv = Eigen::MatrixXd::Constant(1, 1, 1.0);
  CHECK_THROWS_AS(woodbury_expand(K_inv, Eigen::VectorXd::Ones(1), 1.0), StabilityError);
  CHECK_THROWS_AS(woodbury_expand(K_inv, Eigen::VectorXd::Ones(2), 1.0), InputError);
}

TEST_CASE("refresh_inverse residuals") {
  std::mt19937_64 gen(7);
  const KernelSpec spec = KernelSpec::make(KernelFamily::kRbfArd, 2);
  const Eigen::MatrixXd X = oracle::random_matrix(gen, 5, 2, -3, 3);
  const GPState s = make_state(spec, params({1.0, 1.0, 1.0, 0.1}), X, Eigen::VectorXd::Zero(5), zeros(5));
  CHECK(inverse_residual(s) <= 1e-10);
  CHECK(s.jitter == 0.0);

  const KernelSpec exact = rbf_with_noise_floor(1, 0.0);
  Eigen::MatrixXd dup(3, 1);
  dup << 0.5, 0.5, 1.0;
  const GPState d = make_state(exact, params({1.0, 1.0, 0.0}), dup, Eigen::Vector3d(1, 1, 2), zeros(3));
  CHECK(d.jitter > 0.0);
  CHECK(inverse_residual(d) <= 1e-6);

  const GPState one = make_state(spec, params({1.0, 1.0, 2.0, 0.5}), X.topRows(1), Eigen::VectorXd::Ones(1), zeros(1));
  CHECK(one.K_inv(0, 0) == doctest::Approx(1.0 / 2.5).epsilon(1e-15));
}

TEST_CASE("append_point tracks a from-scratch rebuild") {
  std::mt19937_64 gen(8);
  const KernelSpec spec = KernelSpec::make(KernelFamily::kMatern52Ard, 2);
  const auto p = params({0.9, 1.2, 1.0, 0.05});
  const Eigen::MatrixXd X = oracle::random_matrix(gen, 12, 2, -2, 2);
  const Eigen::VectorXd y = oracle::random_matrix(gen, 12, 1);
  GPState s = make_state(spec, p, X.topRows(4), y.head(4), zeros(4));
  for (int i = 4; i < 12; ++i) s = append_point(std::move(s), X.row(i), y[i], i);
  const GPState full = make_state(spec, p, X, y, zeros(12));
  CHECK(max_abs(s.K - full.K) <= 1e-12);
  CHECK(max_abs(s.K_inv - full.K_inv) <= 1e-8);
  CHECK(s.t.back() == 11);
  CHECK(inverse_residual(s) <= 1e-6);

  // An exact duplicate with zero noise forces the rebuild path.
  const KernelSpec exact = rbf_with_noise_floor(2, 0.0);
  GPState e = make_state(exact, params({1.0, 1.0, 1.0, 0.0}), X.topRows(3), y.head(3), zeros(3));
  e = append_point(std::move(e), X.row(0), y[0], 1);
  CHECK(e.size() == 4);
  CHECK(inverse_residual(e) <= 1e-6);
}
