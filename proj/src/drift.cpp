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

#include "driftgp/drift.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "driftgp/error.hpp"

namespace driftgp {

namespace {

void check_pair(std::span<const double> a, std::span<const double> b) {
  if (a.empty()) throw InputError("KPI needs at least one value");
  if (a.size() != b.size()) throw InputError("KPI inputs differ in length");
}

// Acklam's rational approximation of the normal quantile (|rel err| < 1.2e-9).
double acklam(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  const double q = std::sqrt(-2.0 * std::log1p(-p));
  return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
         ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

}  // namespace

std::string_view kpi_name(KpiKind kind) noexcept {
  return kind == KpiKind::kR2 ? "r2" : "mse";
}

std::optional<KpiKind> parse_kpi(std::string_view name) noexcept {
  if (name == "r2" || name == "R2") return KpiKind::kR2;
  if (name == "mse" || name == "MSE") return KpiKind::kMse;
  return std::nullopt;
}

std::string_view drift_name(DriftKind kind) noexcept {
  switch (kind) {
    case DriftKind::kNone: return "none";
    case DriftKind::kIncremental: return "incremental";
    case DriftKind::kAbrupt: return "abrupt";
  }
  return "unknown";
}

KpiWindow::KpiWindow(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw InputError("KPI window capacity must be positive");
}

void KpiWindow::push(double value) {
  if (values_.size() == capacity_) values_.pop_front();
  values_.push_back(value);
}

void KpiWindow::remove_last() {
  if (values_.empty()) throw StateError("remove_last on an empty KPI window");
  values_.pop_back();
}

double KpiWindow::last() const {
  if (values_.empty()) throw StateError("KPI window is empty");
  return values_.back();
}

std::vector<double> KpiWindow::baseline() const {
  if (values_.empty()) return {};
  return {values_.begin(), values_.end() - 1};
}

int window_capacity(long points, long batch_size, int lower, int upper, double delta) {
  if (points < 1 || batch_size < 1) throw InputError("window_capacity needs N, K >= 1");
  if (lower > upper) throw InputError("window_capacity needs LB <= UB");
  const double raw = static_cast<double>(points) / static_cast<double>(batch_size) * delta;
  const long rounded = std::lround(raw);
  return static_cast<int>(std::clamp<long>(rounded, lower, upper));
}

double kpi_mse(std::span<const double> y_true, std::span<const double> y_pred) {
  check_pair(y_true, y_pred);
  double sse = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const double r = y_true[i] - y_pred[i];
    sse += r * r;
  }
  return sse / static_cast<double>(y_true.size());
}

double kpi_r2(std::span<const double> y_true, std::span<const double> y_pred) {
  check_pair(y_true, y_pred);
  double mean = 0.0;
  for (double v : y_true) mean += v;
  mean /= static_cast<double>(y_true.size());
  double sse = 0.0, sst = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    sse += (y_true[i] - y_pred[i]) * (y_true[i] - y_pred[i]);
    sst += (y_true[i] - mean) * (y_true[i] - mean);
  }
  if (sst == 0.0) throw UndefinedVarianceError("R^2 undefined for constant targets");
  return 1.0 - sse / sst;
}

double kpi_value(KpiKind kind, std::span<const double> y_true, std::span<const double> y_pred) {
  return kind == KpiKind::kR2 ? kpi_r2(y_true, y_pred) : kpi_mse(y_true, y_pred);
}

double inv_norm_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) throw InputError("inv_norm_cdf needs p in (0, 1)");
  double x = acklam(p);
  // One Halley step against the erfc-based CDF.
  const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

DriftLimits measure(std::span<const double> baseline, double rho) {
  if (baseline.size() < 2) {
    throw InsufficientHistoryError("drift limits need at least two baseline KPIs");
  }
  if (!(rho > 0.0 && rho < 1.0)) throw InputError("rho must lie in (0, 1)");
  const double n = static_cast<double>(baseline.size());
  double mean = 0.0;
  for (double v : baseline) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : baseline) ss += (v - mean) * (v - mean);

  DriftLimits out;
  out.mu = mean;
  out.sigma = std::sqrt(ss / (n - 1.0));
  out.tau = inv_norm_cdf(1.0 - rho) * out.sigma;
  out.low = out.mu - out.tau;
  out.high = out.mu + out.tau;
  return out;
}

DriftLimits measure(const KpiWindow& window, double rho) {
  const auto base = window.baseline();
  return measure(std::span<const double>(base), rho);
}

DriftVerdict classify(double inst, const DriftLimits& limits, double zeta, KpiKind kind) {
  if (limits.tau < 0.0 || zeta < 0.0) throw InputError("classify needs tau, zeta >= 0");
  DriftVerdict v;
  v.mu = limits.mu;
  v.sigma = limits.sigma;
  v.tau = limits.tau;
  v.low = limits.mu - limits.tau;
  v.high = limits.mu + limits.tau;
  v.dm = std::abs(limits.mu - inst);

  const bool favorable = higher_is_better(kind) ? inst >= limits.mu : inst <= limits.mu;
  if (favorable || v.dm <= zeta) {
    v.kind = DriftKind::kNone;
  } else if (v.dm <= limits.tau) {
    v.kind = DriftKind::kIncremental;
  } else {
    v.kind = DriftKind::kAbrupt;
  }
  return v;
}

}  // namespace driftgp
