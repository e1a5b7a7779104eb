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

#ifndef DRIFTGP_KERNEL_HPP
#define DRIFTGP_KERNEL_HPP

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace driftgp {

enum class KernelFamily {
  kRbfArd,
  kMatern52Ard,
  kRationalQuadratic,
  kPolynomial,
  kPeriodic,
};

std::string_view family_name(KernelFamily family) noexcept;
std::optional<KernelFamily> parse_family(std::string_view name) noexcept;

// How the optimizer sees a hyperparameter. Log-scaled parameters are
// optimized over log(value); linear ones directly.
enum class ParamScale { kLog, kLinear };

struct HyperparamDescriptor {
  std::string name;
  double initial = 1.0;
  double lower = 1e-3;
  double upper = 1e3;
  ParamScale scale = ParamScale::kLog;
};

// Hyperparameter values aligned with a KernelSpec's descriptors, with the
// observation noise variance stored last.
class HyperparamVector {
 public:
  HyperparamVector() = default;
  explicit HyperparamVector(Eigen::VectorXd values) : values_(std::move(values)) {}

  const Eigen::VectorXd& values() const noexcept { return values_; }
  Eigen::Index size() const noexcept { return values_.size(); }
  double operator[](Eigen::Index i) const { return values_[i]; }
  double& operator[](Eigen::Index i) { return values_[i]; }
  double noise() const { return values_[values_.size() - 1]; }

  friend bool operator==(const HyperparamVector& a, const HyperparamVector& b) {
    return a.values_.size() == b.values_.size() && a.values_ == b.values_;
  }

 private:
  Eigen::VectorXd values_;
};

class KernelSpec {
 public:
  // Validates descriptor bounds, name uniqueness and the ARD shape.
  KernelSpec(KernelFamily family, int input_dim,
             std::vector<HyperparamDescriptor> descriptors,
             HyperparamDescriptor noise);

  // Family defaults: lengthscales and variances in [1e-3, 1e3] starting at 1,
  // noise variance in [1e-6, 10] starting at 0.1, period in [1e-2, 1e2].
  static KernelSpec make(KernelFamily family, int input_dim);

  KernelFamily family() const noexcept { return family_; }
  std::string_view name() const noexcept { return family_name(family_); }
  int input_dim() const noexcept { return input_dim_; }
  bool stationary() const noexcept { return family_ != KernelFamily::kPolynomial; }

  // Kernel descriptors only (noise excluded).
  const std::vector<HyperparamDescriptor>& descriptors() const noexcept {
    return descriptors_;
  }
  const HyperparamDescriptor& noise_descriptor() const noexcept { return noise_; }

  // Kernel descriptors followed by the noise descriptor.
  int num_params() const noexcept { return static_cast<int>(descriptors_.size()) + 1; }
  const HyperparamDescriptor& descriptor(int i) const;

  HyperparamVector initial_params() const;

  // Throws ValidationError when `params` has the wrong length or any value
  // lies outside its bounds.
  void validate(const HyperparamVector& params) const;

 private:
  KernelFamily family_;
  int input_dim_;
  std::vector<HyperparamDescriptor> descriptors_;
  HyperparamDescriptor noise_;
};

// k(A_i, B_j) for every row pair. Throws InputError on column mismatch and
// ValidationError on out-of-bounds parameters.
Eigen::MatrixXd eval_cross(const KernelSpec& spec, const HyperparamVector& params,
                           const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

// k(x_i, x_i) for every row.
Eigen::VectorXd eval_diag(const KernelSpec& spec, const HyperparamVector& params,
                          const Eigen::MatrixXd& X);

// eval_cross(X, X) + noise * I.
Eigen::MatrixXd gram(const KernelSpec& spec, const HyperparamVector& params,
                     const Eigen::MatrixXd& X);

// Derivatives of gram(spec, params, X) with respect to each optimizer
// coordinate (log value for log-scaled parameters, the value itself for linear
// ones), noise last.
std::vector<Eigen::MatrixXd> gram_gradients(const KernelSpec& spec,
                                            const HyperparamVector& params,
                                            const Eigen::MatrixXd& X);

// RBF-ARD, Matern52-ARD, RationalQuadratic, Polynomial, Periodic.
std::vector<KernelSpec> default_pool(int input_dim);

// Throws InputError for an unknown name.
KernelSpec kernel_by_name(std::string_view name, int input_dim);

}  // namespace driftgp

#endif  // DRIFTGP_KERNEL_HPP
