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

#ifndef DRIFTGP_DATAGEN_HPP
#define DRIFTGP_DATAGEN_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace driftgp {

enum class StreamFamily {
  kSinusoidal,
  kQuadratic,
  kCubic,
  kExponential,
  kLogarithmic,
  kPiecewise,
  kParabolicWave,
  kGaussianBump,
  kDoubleGaussian,
};

std::string_view stream_family_name(StreamFamily f);
std::optional<StreamFamily> parse_stream_family(std::string_view name);

// Raw closed form of a family at x, before standardization:
//   sinusoidal       sum_j sin(2 pi x_j) / d
//   quadratic        sum_j x_j^2 / d
//   cubic            sum_j x_j^3 / d
//   exponential      exp(x_1 / 2)
//   logarithmic      log(1 + |x_1| sum_j |x_j| / d)
//   piecewise        x_1 if x_1 < 0 else x_1^2
//   parabolic-wave   x_1^2 sin(2 pi x_1)
//   gaussian-bump    exp(-|x|^2 / 2)
//   double-gaussian  exp(-|x - 1.5 e_1|^2 / 2) + exp(-|x + 1.5 e_1|^2 / 2)
double raw_value(StreamFamily f, std::span<const double> x);

// Per-concept multipliers. A concept maps x to
//   amplitude * (raw(frequency * (x - shift)) - m) / s + offset
// where m, s standardize raw(frequency * u) for u ~ U[-3, 3]^d, and inputs
// are drawn from U[-3, 3]^d + shift.
struct ConceptParams {
  double amplitude = 1.0;
  double frequency = 1.0;
  double offset = 0.0;
  double shift = 0.0;

  bool operator==(const ConceptParams&) const = default;
};

struct Standardization {
  double mean = 0.0;
  double sd = 1.0;
};

// Fixed-seed Monte Carlo estimate (independent of the stream seed).
Standardization standardization(StreamFamily f, int dims, double frequency);

double concept_value(StreamFamily f, const ConceptParams& c, std::span<const double> x);

enum class DriftPattern { kAbrupt, kIncremental, kGradual };

std::string_view drift_pattern_name(DriftPattern p);
std::optional<DriftPattern> parse_drift_pattern(std::string_view name);

// Concept i + 1 takes over at boundaries[i]. For incremental and gradual
// drift the change is spread over the `transition` points before each
// boundary; transition 0 spreads it over the whole preceding segment.
struct DriftSchedule {
  DriftPattern kind = DriftPattern::kAbrupt;
  std::vector<ConceptParams> concepts;
  std::vector<long> boundaries;
  long transition = 0;
};

struct StreamSpec {
  StreamFamily family = StreamFamily::kSinusoidal;
  long n_points = 1000;
  int dims = 1;
  double noise_sd = 0.1;
  std::uint64_t seed = 0;
  std::optional<DriftSchedule> drift;

  // Throws InputError on violated invariants.
  void validate() const;
};

struct Stream {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  std::vector<std::int64_t> t;
  std::vector<int> concept_id;

  int dims() const noexcept { return static_cast<int>(X.cols()); }
  long size() const noexcept { return static_cast<long>(X.rows()); }
};

Stream generate(const StreamSpec& spec);

// Abrupt swap at the midpoint: the second concept flips the sign of the
// response, raises its level and moves the inputs.
StreamSpec abrupt_swap_spec(long n_points, int dims, double noise_sd, std::uint64_t seed);

// Two-sample Kolmogorov-Smirnov asymptotic p-value.
double ks_pvalue(std::span<const double> a, std::span<const double> b);
double ks_statistic(std::span<const double> a, std::span<const double> b);

// Jensen-Shannon divergence (base 2) over 64 equal-width bins spanning the
// pooled range, with 1e-10 added to every bin.
double js_divergence(std::span<const double> a, std::span<const double> b);

// Empirical W1 distance divided by the pooled range; 0 when the range is 0.
double wasserstein_norm(std::span<const double> a, std::span<const double> b);

struct ConceptPairReport {
  int from = 0;
  int to = 0;
  double y_ks_pvalue = 0.0;
  double y_js = 0.0;
  double y_wasserstein = 0.0;
  bool x_any_ks_sig = false;
  double x_min_ks_pvalue = 1.0;
  double x_mean_js = 0.0;
};

struct CertifyReport {
  bool applicable = false;
  std::vector<ConceptPairReport> pairs;
};

// Compares consecutive concepts, in order of first appearance.
CertifyReport certify(const Stream& stream);

}  // namespace driftgp

#endif  // DRIFTGP_DATAGEN_HPP
