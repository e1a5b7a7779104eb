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
#include <random>
#include <vector>

#include "driftgp/drift.hpp"
#include "driftgp/error.hpp"
#include "oracles.hpp"

using namespace driftgp;

TEST_CASE("window capacity") {
  CHECK(window_capacity(12400, 20, 10, 50) == 31);
  CHECK(window_capacity(100, 20, 10, 50) == 10);
  CHECK(window_capacity(100000, 20, 10, 50) == 50);
  CHECK_THROWS_AS(window_capacity(0, 20, 10, 50), InputError);
  CHECK_THROWS_AS(window_capacity(100, 20, 60, 50), InputError);
}

TEST_CASE("KPI definitions") {
  const std::vector<double> y{0.0, 1.0, 2.0};
  CHECK(kpi_mse(y, y) == 0.0);
  CHECK(kpi_r2(y, y) == 1.0);
  CHECK(kpi_r2(y, std::vector<double>{1.0, 1.0, 1.0}) == 0.0);
  const std::vector<double> pred{0.0, 1.0, 1.0};
  CHECK(kpi_mse(y, pred) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(kpi_r2(y, pred) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(kpi_r2(std::vector<double>{2.0, 2.0}, std::vector<double>{1.0, 3.0}), UndefinedVarianceError);
  CHECK_THROWS_AS(kpi_mse(std::vector<double>{}, std::vector<double>{}), InputError);
  CHECK_THROWS_AS(kpi_mse(y, std::vector<double>{1.0}), InputError);
  CHECK(parse_kpi("MSE") == KpiKind::kMse);
  CHECK(higher_is_better(KpiKind::kR2));
  CHECK_FALSE(higher_is_better(KpiKind::kMse));
}

TEST_CASE("inverse normal CDF") {
  CHECK(inv_norm_cdf(0.5) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK(std::abs(inv_norm_cdf(0.975) - 1.959963984540) <= 1e-8);
  CHECK(std::abs(inv_norm_cdf(0.994) - 2.512144327930) <= 1e-8);
  CHECK(std::abs(inv_norm_cdf(1.0 - 0.0002) - 3.5400837992) <= 1e-8);
  for (double p = 1e-6; p < 1.0; p += 0.0137) {
    CHECK(std::abs(inv_norm_cdf(p) - oracle::normal_quantile(p)) <= 1e-8);
  }
  CHECK_THROWS_AS(inv_norm_cdf(0.0), InputError);
  CHECK_THROWS_AS(inv_norm_cdf(1.0), InputError);
}

TEST_CASE("window push and remove") {
  KpiWindow w(3);
  w.push(1);
  CHECK(w.size() == 1);
  w.push(2);
  w.push(3);
  w.push(4);
  CHECK(std::vector<double>(w.values().begin(), w.values().end()) == std::vector<double>{2, 3, 4});
  const KpiWindow before = w;
  w.push(9);
  w.remove_last();
  // Eviction is not undone; only the newest entry is dropped.
  CHECK(std::vector<double>(w.values().begin(), w.values().end()) == std::vector<double>{3, 4});
  KpiWindow fresh(5);
  fresh.push(0.5);
  const KpiWindow copy = fresh;
  fresh.push(0.7);
  fresh.remove_last();
  CHECK(fresh == copy);
  KpiWindow empty(2);
  CHECK_THROWS_AS(empty.remove_last(), StateError);
  CHECK(before.baseline() == std::vector<double>{2, 3});
}

TEST_CASE("measure") {
  const std::vector<double> constant{0.9, 0.9, 0.9};
  const auto c = measure(constant, 0.006);
  CHECK(c.sigma == 0.0);
  CHECK(c.tau == 0.0);
  CHECK(c.low == c.mu);
  CHECK(c.high == c.mu);

  const std::vector<double> spread{0.98, 1.0, 1.02};
  const auto s = measure(spread, 0.006);
  CHECK(s.sigma == doctest::Approx(0.02).epsilon(1e-12));
  CHECK(std::abs(s.tau - 0.050242886559) <= 1e-9);
  CHECK(s.low == doctest::Approx(s.mu - s.tau));
  CHECK(s.high == doctest::Approx(s.mu + s.tau));

  CHECK_THROWS_AS(measure(std::vector<double>{1.0}, 0.006), InsufficientHistoryError);

  KpiWindow w(10);
  for (double v : {0.98, 1.0, 1.02, 0.1}) w.push(v);
  CHECK(measure(w, 0.006).mu == doctest::Approx(1.0));

  std::mt19937_64 gen(1);
  std::vector<double> v{0.91, 0.95, 0.97, 0.92, 0.99, 0.94};
  const auto base = measure(v, 0.01);
  for (int i = 0; i < 5; ++i) {
    std::shuffle(v.begin(), v.end(), gen);
    const auto again = measure(v, 0.01);
    CHECK(again.mu == doctest::Approx(base.mu).epsilon(1e-15));
    CHECK(again.sigma == doctest::Approx(base.sigma).epsilon(1e-13));
  }
}

TEST_CASE("classify regimes") {
  DriftLimits l{0.073, 0.95, 0.029, 0.877, 1.023};
  CHECK(l.low == doctest::Approx(0.877));
  CHECK(classify(0.948, l, 0.005, KpiKind::kR2).kind == DriftKind::kNone);
  CHECK(classify(0.90, l, 0.005, KpiKind::kR2).kind == DriftKind::kIncremental);
  const auto abrupt = classify(0.86, l, 0.005, KpiKind::kR2);
  CHECK(abrupt.kind == DriftKind::kAbrupt);
  CHECK(abrupt.dm == doctest::Approx(0.09));
  CHECK(classify(0.99, l, 0.005, KpiKind::kR2).kind == DriftKind::kNone);
  CHECK(classify(0.99, l, 0.005, KpiKind::kMse).kind == DriftKind::kIncremental);
  CHECK_THROWS_AS(classify(0.9, DriftLimits{-1, 0, 0, 0, 0}, 0.0, KpiKind::kR2), InputError);
}

TEST_CASE("classify is scale-consistent and mirror-symmetric") {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> pos(0.001, 0.5);
  for (int i = 0; i < 500; ++i) {
    const double mu = u(gen);
    const double inst = mu + 0.3 * u(gen);
    const double tau = pos(gen);
    const double zeta = pos(gen) * tau;
    const double k = pos(gen) * 10;
    const DriftLimits a{tau, mu, 0, mu - tau, mu + tau};
    const DriftLimits b{k * tau, mu, 0, mu - k * tau, mu + k * tau};
    CHECK(classify(inst, a, zeta, KpiKind::kR2).kind ==
          classify(mu + k * (inst - mu), b, k * zeta, KpiKind::kR2).kind);
    CHECK(classify(inst, a, zeta, KpiKind::kMse).kind ==
          classify(2 * mu - inst, a, zeta, KpiKind::kR2).kind);
  }
}

TEST_CASE("false-alarm rate on an i.i.d. KPI stream") {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> kpi(0.95, 0.01);
  KpiWindow w(static_cast<std::size_t>(window_capacity(12400, 20, 10, 50)));
  int abrupt = 0;
  int steps = 0;
  for (int i = 0; i < 10000; ++i) {
    const double v = kpi(gen);
    w.push(v);
    if (w.size() < 3) continue;
    ++steps;
    abrupt += classify(v, measure(w, 0.006), 0.005, KpiKind::kR2).kind == DriftKind::kAbrupt;
  }
  CHECK(static_cast<double>(abrupt) / steps <= 0.012);
}
