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

#include "driftgp/datagen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "driftgp/error.hpp"

namespace driftgp {

namespace {

constexpr std::array<std::pair<StreamFamily, std::string_view>, 9> kFamilies{{
    {StreamFamily::kSinusoidal, "sinusoidal"},
    {StreamFamily::kQuadratic, "quadratic"},
    {StreamFamily::kCubic, "cubic"},
    {StreamFamily::kExponential, "exponential"},
    {StreamFamily::kLogarithmic, "logarithmic"},
    {StreamFamily::kPiecewise, "piecewise"},
    {StreamFamily::kParabolicWave, "parabolic-wave"},
    {StreamFamily::kGaussianBump, "gaussian-bump"},
    {StreamFamily::kDoubleGaussian, "double-gaussian"},
}};

constexpr std::uint64_t kStandardizationSeed = 0x5eed5eed5eedULL;
constexpr int kStandardizationSamples = 20000;
constexpr int kJsBins = 64;
constexpr double kJsSmoothing = 1e-10;

// Uniform [0, 1) from the top 53 bits; identical on every platform.
double unit(std::mt19937_64& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

double uniform(std::mt19937_64& gen, double lo, double hi) { return lo + (hi - lo) * unit(gen); }

ConceptParams lerp(const ConceptParams& a, const ConceptParams& b, double w) {
  auto mix = [w](double p, double q) { return p + w * (q - p); };
  return {mix(a.amplitude, b.amplitude), mix(a.frequency, b.frequency), mix(a.offset, b.offset),
          mix(a.shift, b.shift)};
}

std::vector<double> sorted(std::span<const double> v) {
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  return s;
}

// Survival function of the Kolmogorov distribution.
double kolmogorov_sf(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    const double pi = std::numbers::pi;
    double cdf = 0.0;
    for (int k = 1; k <= 50; ++k) {
      const double odd = 2.0 * k - 1.0;
      cdf += std::exp(-odd * odd * pi * pi / (8.0 * lambda * lambda));
    }
    cdf *= std::sqrt(2.0 * pi) / lambda;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double sf = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sf += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-300) break;
  }
  return std::clamp(sf, 0.0, 1.0);
}

std::vector<double> column(const Eigen::MatrixXd& X, Eigen::Index j, const std::vector<long>& rows) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (long r : rows) out.push_back(X(r, j));
  return out;
}

}  // namespace

std::string_view stream_family_name(StreamFamily f) {
  for (const auto& [family, name] : kFamilies) {
    if (family == f) return name;
  }
  return "unknown";
}

std::optional<StreamFamily> parse_stream_family(std::string_view name) {
  for (const auto& [family, n] : kFamilies) {
    if (n == name) return family;
  }
  return std::nullopt;
}

double raw_value(StreamFamily f, std::span<const double> x) {
  const double d = static_cast<double>(x.size());
  const double two_pi = 2.0 * std::numbers::pi;
  const double x1 = x[0];
  switch (f) {
    case StreamFamily::kSinusoidal: {
      double s = 0.0;
      for (double v : x) s += std::sin(two_pi * v);
      return s / d;
    }
    case StreamFamily::kQuadratic: {
      double s = 0.0;
      for (double v : x) s += v * v;
      return s / d;
    }
    case StreamFamily::kCubic: {
      double s = 0.0;
      for (double v : x) s += v * v * v;
      return s / d;
    }
    case StreamFamily::kExponential:
      return std::exp(x1 / 2.0);
    case StreamFamily::kLogarithmic: {
      double s = 0.0;
      for (double v : x) s += std::abs(v);
      return std::log(1.0 + std::abs(x1) * s / d);
    }
    case StreamFamily::kPiecewise:
      return x1 < 0.0 ? x1 : x1 * x1;
    case StreamFamily::kParabolicWave:
      return x1 * x1 * std::sin(two_pi * x1);
    case StreamFamily::kGaussianBump: {
      double s = 0.0;
      for (double v : x) s += v * v;
      return std::exp(-s / 2.0);
    }
    case StreamFamily::kDoubleGaussian: {
      double rest = 0.0;
      for (std::size_t j = 1; j < x.size(); ++j) rest += x[j] * x[j];
      const double a = (x1 - 1.5) * (x1 - 1.5) + rest;
      const double b = (x1 + 1.5) * (x1 + 1.5) + rest;
      return std::exp(-a / 2.0) + std::exp(-b / 2.0);
    }
  }
  return 0.0;
}

Standardization standardization(StreamFamily f, int dims, double frequency) {
  std::mt19937_64 gen(kStandardizationSeed);
  std::vector<double> x(static_cast<std::size_t>(dims));
  double mean = 0.0;
  double m2 = 0.0;
  for (int i = 0; i < kStandardizationSamples; ++i) {
    for (double& v : x) v = frequency * uniform(gen, -3.0, 3.0);
    const double r = raw_value(f, x);
    const double delta = r - mean;
    mean += delta / (i + 1);
    m2 += delta * (r - mean);
  }
  const double sd = std::sqrt(m2 / (kStandardizationSamples - 1));
  return {mean, sd > 1e-12 ? sd : 1.0};
}

double concept_value(StreamFamily f, const ConceptParams& c, std::span<const double> x) {
  const Standardization s = standardization(f, static_cast<int>(x.size()), c.frequency);
  std::vector<double> u(x.begin(), x.end());
  for (double& v : u) v = c.frequency * (v - c.shift);
  return c.amplitude * (raw_value(f, u) - s.mean) / s.sd + c.offset;
}

std::string_view drift_pattern_name(DriftPattern p) {
  switch (p) {
    case DriftPattern::kAbrupt:
      return "abrupt";
    case DriftPattern::kIncremental:
      return "incremental";
    case DriftPattern::kGradual:
      return "gradual";
  }
  return "unknown";
}

std::optional<DriftPattern> parse_drift_pattern(std::string_view name) {
  if (name == "abrupt") return DriftPattern::kAbrupt;
  if (name == "incremental") return DriftPattern::kIncremental;
  if (name == "gradual") return DriftPattern::kGradual;
  return std::nullopt;
}

void StreamSpec::validate() const {
  if (n_points < 1) throw InputError("stream: n_points must be >= 1");
  if (dims < 1) throw InputError("stream: dims must be >= 1");
  if (!(noise_sd >= 0.0)) throw InputError("stream: noise_sd must be >= 0");
  if (!drift) return;
  if (drift->concepts.size() < 2) throw InputError("stream: drift needs at least two concepts");
  if (drift->boundaries.size() != drift->concepts.size() - 1) {
    throw InputError("stream: drift needs one boundary per concept change");
  }
  long prev = 0;
  for (long b : drift->boundaries) {
    if (b <= prev || b >= n_points) {
      throw InputError("stream: boundaries must be strictly increasing and inside the stream");
    }
    prev = b;
  }
  if (drift->transition < 0) throw InputError("stream: transition must be >= 0");
  for (const auto& c : drift->concepts) {
    if (!std::isfinite(c.amplitude) || !std::isfinite(c.frequency) || !std::isfinite(c.offset) ||
        !std::isfinite(c.shift) || c.frequency == 0.0) {
      throw InputError("stream: concept parameters must be finite with non-zero frequency");
    }
  }
}

Stream generate(const StreamSpec& spec) {
  spec.validate();
  const long n = spec.n_points;
  const int d = spec.dims;
  std::mt19937_64 gen(spec.seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  std::vector<ConceptParams> concepts = spec.drift ? spec.drift->concepts
                                                   : std::vector<ConceptParams>{ConceptParams{}};
  std::map<double, Standardization> scales;
  for (const auto& c : concepts) scales.emplace(c.frequency, standardization(spec.family, d, c.frequency));

  Stream out;
  out.X.resize(n, d);
  out.y.resize(n);
  out.t.resize(static_cast<std::size_t>(n));
  out.concept_id.resize(static_cast<std::size_t>(n));

  std::vector<double> x(static_cast<std::size_t>(d));
  std::vector<double> u(static_cast<std::size_t>(d));
  std::size_t seg = 0;
  for (long i = 0; i < n; ++i) {
    // Active concept pair (from, to) and the mixing weight toward `to`.
    int from = 0;
    double weight = 0.0;
    if (spec.drift) {
      const auto& b = spec.drift->boundaries;
      while (seg < b.size() && i >= b[seg]) ++seg;
      from = static_cast<int>(seg);
      if (spec.drift->kind != DriftPattern::kAbrupt && seg < b.size()) {
        const long seg_start = seg == 0 ? 0 : b[seg - 1];
        const long width =
            spec.drift->transition > 0 ? std::min(spec.drift->transition, b[seg] - seg_start)
                                       : b[seg] - seg_start;
        const long ramp_start = b[seg] - width;
        if (i >= ramp_start) weight = static_cast<double>(i - ramp_start + 1) / (width + 1);
      }
    }

    ConceptParams active = concepts[static_cast<std::size_t>(from)];
    int id = from;
    if (weight > 0.0) {
      const ConceptParams& next = concepts[static_cast<std::size_t>(from + 1)];
      if (spec.drift->kind == DriftPattern::kIncremental) {
        active = lerp(active, next, weight);
        if (weight >= 0.5) id = from + 1;
      }
    }

    for (int j = 0; j < d; ++j) x[static_cast<std::size_t>(j)] = uniform(gen, -3.0, 3.0);
    if (weight > 0.0 && spec.drift->kind == DriftPattern::kGradual && unit(gen) < weight) {
      active = concepts[static_cast<std::size_t>(from + 1)];
      id = from + 1;
    }
    for (int j = 0; j < d; ++j) x[static_cast<std::size_t>(j)] += active.shift;

    // Incremental frequencies are interpolated, so their scale is not cached.
    auto it = scales.find(active.frequency);
    const Standardization s =
        it != scales.end() ? it->second : standardization(spec.family, d, active.frequency);
    for (int j = 0; j < d; ++j) {
      u[static_cast<std::size_t>(j)] = active.frequency * (x[static_cast<std::size_t>(j)] - active.shift);
    }
    const double clean = active.amplitude * (raw_value(spec.family, u) - s.mean) / s.sd + active.offset;
    const double eps = spec.noise_sd > 0.0 ? spec.noise_sd * noise(gen) : 0.0;

    for (int j = 0; j < d; ++j) out.X(i, j) = x[static_cast<std::size_t>(j)];
    out.y[i] = clean + eps;
    out.t[static_cast<std::size_t>(i)] = i;
    out.concept_id[static_cast<std::size_t>(i)] = id;
  }
  return out;
}

StreamSpec abrupt_swap_spec(long n_points, int dims, double noise_sd, std::uint64_t seed) {
  StreamSpec spec;
  spec.family = StreamFamily::kQuadratic;
  spec.n_points = n_points;
  spec.dims = dims;
  spec.noise_sd = noise_sd;
  spec.seed = seed;
  DriftSchedule drift;
  drift.kind = DriftPattern::kAbrupt;
  drift.concepts = {ConceptParams{}, ConceptParams{-1.0, 1.0, 4.0, 6.0}};
  drift.boundaries = {n_points / 2};
  spec.drift = drift;
  return spec;
}

double ks_statistic(std::span<const double> a, std::span<const double> b) {
  const std::vector<double> sa = sorted(a);
  const std::vector<double> sb = sorted(b);
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < sa.size() || j < sb.size()) {
    double v;
    if (j >= sb.size() || (i < sa.size() && sa[i] <= sb[j])) {
      v = sa[i];
    } else {
      v = sb[j];
    }
    while (i < sa.size() && sa[i] <= v) ++i;
    while (j < sb.size() && sb[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_pvalue(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw InputError("ks_pvalue needs at least two values per sample");
  const double m = static_cast<double>(a.size());
  const double n = static_cast<double>(b.size());
  return kolmogorov_sf(std::sqrt(m * n / (m + n)) * ks_statistic(a, b));
}

double js_divergence(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InputError("js_divergence needs non-empty samples");
  const auto [amin, amax] = std::minmax_element(a.begin(), a.end());
  const auto [bmin, bmax] = std::minmax_element(b.begin(), b.end());
  const double lo = std::min(*amin, *bmin);
  const double hi = std::max(*amax, *bmax);
  if (!(hi > lo)) return 0.0;

  auto histogram = [&](std::span<const double> s) {
    std::vector<double> h(kJsBins, kJsSmoothing);
    for (double v : s) {
      auto k = static_cast<int>(std::floor((v - lo) / (hi - lo) * kJsBins));
      h[static_cast<std::size_t>(std::clamp(k, 0, kJsBins - 1))] += 1.0;
    }
    double total = 0.0;
    for (double c : h) total += c;
    for (double& c : h) c /= total;
    return h;
  };
  const std::vector<double> p = histogram(a);
  const std::vector<double> q = histogram(b);
  double js = 0.0;
  for (int k = 0; k < kJsBins; ++k) {
    const auto i = static_cast<std::size_t>(k);
    const double m = 0.5 * (p[i] + q[i]);
    js += 0.5 * p[i] * std::log2(p[i] / m) + 0.5 * q[i] * std::log2(q[i] / m);
  }
  return std::clamp(js, 0.0, 1.0);
}

double wasserstein_norm(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InputError("wasserstein_norm needs non-empty samples");
  const std::vector<double> sa = sorted(a);
  const std::vector<double> sb = sorted(b);
  std::vector<double> all(sa);
  all.insert(all.end(), sb.begin(), sb.end());
  std::sort(all.begin(), all.end());
  const double range = all.back() - all.front();
  if (!(range > 0.0)) return 0.0;

  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double w = 0.0;
  for (std::size_t k = 0; k + 1 < all.size(); ++k) {
    while (i < sa.size() && sa[i] <= all[k]) ++i;
    while (j < sb.size() && sb[j] <= all[k]) ++j;
    w += std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb) * (all[k + 1] - all[k]);
  }
  return std::clamp(w / range, 0.0, 1.0);
}

CertifyReport certify(const Stream& stream) {
  std::vector<int> order;
  std::map<int, std::vector<long>> rows;
  for (long i = 0; i < stream.size(); ++i) {
    const int id = stream.concept_id[static_cast<std::size_t>(i)];
    if (rows.find(id) == rows.end()) order.push_back(id);
    rows[id].push_back(i);
  }
  CertifyReport report;
  if (order.size() < 2) return report;
  report.applicable = true;

  for (std::size_t k = 0; k + 1 < order.size(); ++k) {
    const auto& ra = rows[order[k]];
    const auto& rb = rows[order[k + 1]];
    ConceptPairReport pair;
    pair.from = order[k];
    pair.to = order[k + 1];
    std::vector<double> ya;
    std::vector<double> yb;
    for (long r : ra) ya.push_back(stream.y[r]);
    for (long r : rb) yb.push_back(stream.y[r]);
    const bool testable = ya.size() >= 2 && yb.size() >= 2;
    pair.y_ks_pvalue = testable ? ks_pvalue(ya, yb) : 1.0;
    pair.y_js = js_divergence(ya, yb);
    pair.y_wasserstein = wasserstein_norm(ya, yb);
    double js_sum = 0.0;
    for (Eigen::Index j = 0; j < stream.X.cols(); ++j) {
      const auto xa = column(stream.X, j, ra);
      const auto xb = column(stream.X, j, rb);
      const double p = testable ? ks_pvalue(xa, xb) : 1.0;
      pair.x_min_ks_pvalue = std::min(pair.x_min_ks_pvalue, p);
      if (p < 0.05) pair.x_any_ks_sig = true;
      js_sum += js_divergence(xa, xb);
    }
    pair.x_mean_js = js_sum / static_cast<double>(stream.X.cols());
    report.pairs.push_back(pair);
  }
  return report;
}

}  // namespace driftgp
