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

#include "driftgp/kernel.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "driftgp/error.hpp"

namespace driftgp {

namespace {

constexpr double kSqrt5 = 2.2360679774997896964;

HyperparamDescriptor log_param(std::string name, double initial, double lower,
                               double upper) {
  return {std::move(name), initial, lower, upper, ParamScale::kLog};
}

void check_columns(const KernelSpec& spec, const Eigen::MatrixXd& M,
                   const char* which) {
  if (M.cols() != spec.input_dim()) {
    std::ostringstream msg;
    msg << which << " has " << M.cols() << " columns, kernel expects "
        << spec.input_dim();
    throw InputError(msg.str());
  }
}

// Rows scaled by 1 / lengthscale_j, for the ARD families.
Eigen::MatrixXd scale_rows(const Eigen::MatrixXd& M, const HyperparamVector& p,
                           int dim) {
  Eigen::RowVectorXd inv(dim);
  for (int j = 0; j < dim; ++j) inv[j] = 1.0 / p[j];
  return M.array().rowwise() * inv.array();
}

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  Eigen::MatrixXd D(A.rows(), B.rows());
  for (Eigen::Index j = 0; j < B.rows(); ++j) {
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
      D(i, j) = (A.row(i) - B.row(j)).squaredNorm();
    }
  }
  return D;
}

double matern52(double r) {
  const double s = kSqrt5 * r;
  return (1.0 + s + s * s / 3.0) * std::exp(-s);
}

Eigen::MatrixXd cross_unchecked(const KernelSpec& spec, const HyperparamVector& p,
                                const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  const int d = spec.input_dim();
  switch (spec.family()) {
    case KernelFamily::kRbfArd: {
      const double variance = p[d];
      Eigen::MatrixXd D = squared_distances(scale_rows(A, p, d), scale_rows(B, p, d));
      return variance * (-0.5 * D.array()).exp().matrix();
    }
    case KernelFamily::kMatern52Ard: {
      const double variance = p[d];
      Eigen::MatrixXd D = squared_distances(scale_rows(A, p, d), scale_rows(B, p, d));
      return D.unaryExpr([variance](double r2) { return variance * matern52(std::sqrt(r2)); });
    }
    case KernelFamily::kRationalQuadratic: {
      const double ls = p[0], alpha = p[1], variance = p[2];
      Eigen::MatrixXd D = squared_distances(A, B);
      const double denom = 2.0 * alpha * ls * ls;
      return D.unaryExpr([=](double r2) {
        return variance * std::pow(1.0 + r2 / denom, -alpha);
      });
    }
    case KernelFamily::kPolynomial: {
      const double scale = p[0], bias = p[1];
      Eigen::MatrixXd inner = A * B.transpose();
      return (scale * inner.array() + bias).square().matrix();
    }
    case KernelFamily::kPeriodic: {
      const double period = p[0], ls = p[1], variance = p[2];
      Eigen::MatrixXd K(A.rows(), B.rows());
      const double w = std::numbers::pi / period;
      for (Eigen::Index j = 0; j < B.rows(); ++j) {
        for (Eigen::Index i = 0; i < A.rows(); ++i) {
          double s = 0.0;
          for (int c = 0; c < d; ++c) {
            const double v = std::sin(w * (A(i, c) - B(j, c)));
            s += v * v;
          }
          K(i, j) = variance * std::exp(-2.0 * s / (ls * ls));
        }
      }
      return K;
    }
  }
  throw InputError("unknown kernel family");
}

}  // namespace

std::string_view family_name(KernelFamily family) noexcept {
  switch (family) {
    case KernelFamily::kRbfArd: return "RBF";
    case KernelFamily::kMatern52Ard: return "Matern52";
    case KernelFamily::kRationalQuadratic: return "RationalQuadratic";
    case KernelFamily::kPolynomial: return "Polynomial";
    case KernelFamily::kPeriodic: return "Periodic";
  }
  return "unknown";
}

std::optional<KernelFamily> parse_family(std::string_view name) noexcept {
  for (auto f : {KernelFamily::kRbfArd, KernelFamily::kMatern52Ard,
                 KernelFamily::kRationalQuadratic, KernelFamily::kPolynomial,
                 KernelFamily::kPeriodic}) {
    if (family_name(f) == name) return f;
  }
  if (name == "RBF-ARD" || name == "Rbf" || name == "rbf") return KernelFamily::kRbfArd;
  if (name == "Matern52-ARD" || name == "matern52") return KernelFamily::kMatern52Ard;
  if (name == "RQ" || name == "rq") return KernelFamily::kRationalQuadratic;
  if (name == "Poly" || name == "poly") return KernelFamily::kPolynomial;
  if (name == "periodic") return KernelFamily::kPeriodic;
  return std::nullopt;
}

KernelSpec::KernelSpec(KernelFamily family, int input_dim,
                       std::vector<HyperparamDescriptor> descriptors,
                       HyperparamDescriptor noise)
    : family_(family), input_dim_(input_dim), descriptors_(std::move(descriptors)),
      noise_(std::move(noise)) {
  if (input_dim_ < 1) throw InputError("kernel input_dim must be >= 1");

  std::size_t expected = 0;
  switch (family_) {
    case KernelFamily::kRbfArd:
    case KernelFamily::kMatern52Ard: expected = static_cast<std::size_t>(input_dim_) + 1; break;
    case KernelFamily::kRationalQuadratic: expected = 3; break;
    case KernelFamily::kPolynomial: expected = 2; break;
    case KernelFamily::kPeriodic: expected = 3; break;
  }
  if (descriptors_.size() != expected) {
    throw ValidationError(std::string(name()) + ": wrong number of hyperparameter descriptors");
  }

  std::set<std::string> names;
  auto check = [&names](const HyperparamDescriptor& h) {
    if (!std::isfinite(h.lower) || !std::isfinite(h.upper) || !(h.lower < h.upper) ||
        h.initial < h.lower || h.initial > h.upper) {
      throw ValidationError("descriptor '" + h.name + "' has invalid bounds");
    }
    if (h.scale == ParamScale::kLog && h.lower <= 0.0) {
      throw ValidationError("log-scaled descriptor '" + h.name + "' needs a positive lower bound");
    }
    if (!names.insert(h.name).second) {
      throw ValidationError("duplicate descriptor name '" + h.name + "'");
    }
  };
  for (const auto& h : descriptors_) check(h);
  check(noise_);
}

KernelSpec KernelSpec::make(KernelFamily family, int input_dim) {
  if (input_dim < 1) throw InputError("kernel input_dim must be >= 1");
  std::vector<HyperparamDescriptor> d;
  switch (family) {
    case KernelFamily::kRbfArd:
    case KernelFamily::kMatern52Ard:
      for (int j = 0; j < input_dim; ++j) {
        d.push_back(log_param("lengthscale_" + std::to_string(j), 1.0, 1e-3, 1e3));
      }
      d.push_back(log_param("variance", 1.0, 1e-3, 1e3));
      break;
    case KernelFamily::kRationalQuadratic:
      d.push_back(log_param("lengthscale", 1.0, 1e-3, 1e3));
      d.push_back(log_param("alpha", 1.0, 1e-3, 1e3));
      d.push_back(log_param("variance", 1.0, 1e-3, 1e3));
      break;
    case KernelFamily::kPolynomial:
      d.push_back(log_param("scale", 1.0, 1e-3, 1e3));
      d.push_back({"bias", 1.0, 0.0, 10.0, ParamScale::kLinear});
      break;
    case KernelFamily::kPeriodic:
      d.push_back(log_param("period", 1.0, 1e-2, 1e2));
      d.push_back(log_param("lengthscale", 1.0, 1e-3, 1e3));
      d.push_back(log_param("variance", 1.0, 1e-3, 1e3));
      break;
  }
  return KernelSpec(family, input_dim, std::move(d), log_param("noise", 0.1, 1e-6, 10.0));
}

const HyperparamDescriptor& KernelSpec::descriptor(int i) const {
  if (i < 0 || i > static_cast<int>(descriptors_.size())) {
    throw InputError("descriptor index out of range");
  }
  return i == static_cast<int>(descriptors_.size()) ? noise_ : descriptors_[i];
}

HyperparamVector KernelSpec::initial_params() const {
  Eigen::VectorXd v(num_params());
  for (int i = 0; i < num_params(); ++i) v[i] = descriptor(i).initial;
  return HyperparamVector(std::move(v));
}

void KernelSpec::validate(const HyperparamVector& params) const {
  if (params.size() != num_params()) {
    std::ostringstream msg;
    msg << name() << " expects " << num_params() << " hyperparameters, got " << params.size();
    throw ValidationError(msg.str());
  }
  for (int i = 0; i < num_params(); ++i) {
    const auto& h = descriptor(i);
    if (!(params[i] >= h.lower && params[i] <= h.upper)) {
      std::ostringstream msg;
      msg << name() << ": " << h.name << " = " << params[i] << " outside [" << h.lower
          << ", " << h.upper << "]";
      throw ValidationError(msg.str());
    }
  }
}

Eigen::MatrixXd eval_cross(const KernelSpec& spec, const HyperparamVector& params,
                           const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  check_columns(spec, A, "A");
  check_columns(spec, B, "B");
  spec.validate(params);
  return cross_unchecked(spec, params, A, B);
}

Eigen::VectorXd eval_diag(const KernelSpec& spec, const HyperparamVector& params,
                          const Eigen::MatrixXd& X) {
  check_columns(spec, X, "X");
  spec.validate(params);
  const int d = spec.input_dim();
  switch (spec.family()) {
    case KernelFamily::kRbfArd:
    case KernelFamily::kMatern52Ard:
      return Eigen::VectorXd::Constant(X.rows(), params[d]);
    case KernelFamily::kRationalQuadratic:
    case KernelFamily::kPeriodic:
      return Eigen::VectorXd::Constant(X.rows(), params[2]);
    case KernelFamily::kPolynomial:
      return (params[0] * X.rowwise().squaredNorm().array() + params[1]).square().matrix();
  }
  throw InputError("unknown kernel family");
}

Eigen::MatrixXd gram(const KernelSpec& spec, const HyperparamVector& params,
                     const Eigen::MatrixXd& X) {
  Eigen::MatrixXd K = eval_cross(spec, params, X, X);
  K.diagonal().array() += params.noise();
  return K;
}

std::vector<Eigen::MatrixXd> gram_gradients(const KernelSpec& spec,
                                            const HyperparamVector& params,
                                            const Eigen::MatrixXd& X) {
  check_columns(spec, X, "X");
  spec.validate(params);
  const int d = spec.input_dim();
  const Eigen::Index n = X.rows();
  std::vector<Eigen::MatrixXd> grads;
  grads.reserve(static_cast<std::size_t>(spec.num_params()));
  const Eigen::MatrixXd K = cross_unchecked(spec, params, X, X);

  switch (spec.family()) {
    case KernelFamily::kRbfArd: {
      for (int c = 0; c < d; ++c) {
        Eigen::MatrixXd G(n, n);
        const double inv_l2 = 1.0 / (params[c] * params[c]);
        for (Eigen::Index j = 0; j < n; ++j) {
          for (Eigen::Index i = 0; i < n; ++i) {
            const double delta = X(i, c) - X(j, c);
            G(i, j) = K(i, j) * delta * delta * inv_l2;
          }
        }
        grads.push_back(std::move(G));
      }
      grads.push_back(K);
      break;
    }
    case KernelFamily::kMatern52Ard: {
      const double variance = params[d];
      const Eigen::MatrixXd Xs = scale_rows(X, params, d);
      const Eigen::MatrixXd D = squared_distances(Xs, Xs);
      // d k / d log l_c = v (5/3) (1 + sqrt5 r) exp(-sqrt5 r) delta_c^2 / l_c^2
      Eigen::MatrixXd common = D.unaryExpr([variance](double r2) {
        const double s = kSqrt5 * std::sqrt(r2);
        return variance * (5.0 / 3.0) * (1.0 + s) * std::exp(-s);
      });
      for (int c = 0; c < d; ++c) {
        Eigen::MatrixXd G(n, n);
        for (Eigen::Index j = 0; j < n; ++j) {
          for (Eigen::Index i = 0; i < n; ++i) {
            const double delta = Xs(i, c) - Xs(j, c);
            G(i, j) = common(i, j) * delta * delta;
          }
        }
        grads.push_back(std::move(G));
      }
      grads.push_back(K);
      break;
    }
    case KernelFamily::kRationalQuadratic: {
      const double ls = params[0], alpha = params[1], variance = params[2];
      const Eigen::MatrixXd D = squared_distances(X, X);
      Eigen::MatrixXd g_ls(n, n), g_alpha(n, n);
      for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
          const double r2 = D(i, j);
          const double base = 1.0 + r2 / (2.0 * alpha * ls * ls);
          g_ls(i, j) = variance * std::pow(base, -alpha - 1.0) * r2 / (ls * ls);
          g_alpha(i, j) = alpha * K(i, j) *
                          (-std::log(base) + r2 / (2.0 * alpha * ls * ls * base));
        }
      }
      grads.push_back(std::move(g_ls));
      grads.push_back(std::move(g_alpha));
      grads.push_back(K);
      break;
    }
    case KernelFamily::kPolynomial: {
      const double scale = params[0], bias = params[1];
      const Eigen::MatrixXd inner = X * X.transpose();
      const Eigen::ArrayXXd base = scale * inner.array() + bias;
      grads.push_back((2.0 * base * scale * inner.array()).matrix());
      grads.push_back((2.0 * base).matrix());
      break;
    }
    case KernelFamily::kPeriodic: {
      const double period = params[0], ls = params[1];
      const double w = std::numbers::pi / period;
      Eigen::MatrixXd g_p(n, n), g_ls(n, n);
      for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
          double s = 0.0, t = 0.0;
          for (int c = 0; c < d; ++c) {
            const double delta = X(i, c) - X(j, c);
            const double v = std::sin(w * delta);
            s += v * v;
            t += std::sin(2.0 * w * delta) * w * delta;
          }
          g_p(i, j) = K(i, j) * 2.0 * t / (ls * ls);
          g_ls(i, j) = K(i, j) * 4.0 * s / (ls * ls);
        }
      }
      grads.push_back(std::move(g_p));
      grads.push_back(std::move(g_ls));
      grads.push_back(K);
      break;
    }
  }
  grads.push_back(params.noise() * Eigen::MatrixXd::Identity(n, n));
  return grads;
}

std::vector<KernelSpec> default_pool(int input_dim) {
  return {KernelSpec::make(KernelFamily::kRbfArd, input_dim),
          KernelSpec::make(KernelFamily::kMatern52Ard, input_dim),
          KernelSpec::make(KernelFamily::kRationalQuadratic, input_dim),
          KernelSpec::make(KernelFamily::kPolynomial, input_dim),
          KernelSpec::make(KernelFamily::kPeriodic, input_dim)};
}

KernelSpec kernel_by_name(std::string_view name, int input_dim) {
  auto family = parse_family(name);
  if (!family) throw InputError("unknown kernel '" + std::string(name) + "'");
  return KernelSpec::make(*family, input_dim);
}

}  // namespace driftgp
