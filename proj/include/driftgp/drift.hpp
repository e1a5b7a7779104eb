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

#ifndef DRIFTGP_DRIFT_HPP
#define DRIFTGP_DRIFT_HPP

#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace driftgp {

enum class KpiKind { kR2, kMse };

constexpr bool higher_is_better(KpiKind kind) noexcept { return kind == KpiKind::kR2; }
std::string_view kpi_name(KpiKind kind) noexcept;
std::optional<KpiKind> parse_kpi(std::string_view name) noexcept;

// Bounded FIFO of per-batch KPI values. The newest entry is the instant KPI;
// everything before it is the baseline.
class KpiWindow {
 public:
  explicit KpiWindow(std::size_t capacity);

  // Appends, evicting the oldest entry when full.
  void push(double value);
  // Drops the most recent entry. Throws StateError when empty.
  void remove_last();

  std::size_t size() const noexcept { return values_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }
  bool empty() const noexcept { return values_.empty(); }
  const std::deque<double>& values() const noexcept { return values_; }
  double last() const;
  std::vector<double> baseline() const;

  friend bool operator==(const KpiWindow&, const KpiWindow&) = default;

 private:
  std::size_t capacity_;
  std::deque<double> values_;
};

// KWS = clamp(round(points / batch_size * delta), lower, upper).
int window_capacity(long points, long batch_size, int lower, int upper, double delta = 0.05);

double kpi_mse(std::span<const double> y_true, std::span<const double> y_pred);
// Throws UndefinedVarianceError when y_true is constant.
double kpi_r2(std::span<const double> y_true, std::span<const double> y_pred);
double kpi_value(KpiKind kind, std::span<const double> y_true, std::span<const double> y_pred);

// Standard normal quantile, |error| <= 1e-8 on (0, 1).
double inv_norm_cdf(double p);

struct DriftLimits {
  double tau = 0.0;
  double mu = 0.0;
  double sigma = 0.0;
  double low = 0.0;
  double high = 0.0;
};

// Limits from baseline values: mu, sample sigma (n - 1), tau = z(1 - rho) * sigma.
// Throws InsufficientHistoryError for fewer than two values.
DriftLimits measure(std::span<const double> baseline, double rho);
// Same, over the window's baseline (all entries except the newest).
DriftLimits measure(const KpiWindow& window, double rho);

enum class DriftKind { kNone, kIncremental, kAbrupt };
std::string_view drift_name(DriftKind kind) noexcept;

struct DriftVerdict {
  DriftKind kind = DriftKind::kNone;
  double dm = 0.0;
  double mu = 0.0;
  double sigma = 0.0;
  double tau = 0.0;
  double low = 0.0;
  double high = 0.0;
};

// Drift magnitude |mu - inst| against the safe area zeta and threshold tau.
// Deviations on the favorable side of mu are never drift.
DriftVerdict classify(double inst, const DriftLimits& limits, double zeta, KpiKind kind);

}  // namespace driftgp

#endif  // DRIFTGP_DRIFT_HPP
