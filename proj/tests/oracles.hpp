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

// Slow, independent reference implementations used to cross-check the
// library. Nothing here calls into driftgp numerics.

#ifndef DRIFTGP_TESTS_ORACLES_HPP
#define DRIFTGP_TESTS_ORACLES_HPP

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>

namespace oracle {

inline Eigen::MatrixXd random_matrix(std::mt19937_64& gen, int rows, int cols, double lo = -1.0,
                                     double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::MatrixXd M(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) M(i, j) = u(gen);
  }
  return M;
}

inline Eigen::MatrixXd random_spd(std::mt19937_64& gen, int n) {
  const Eigen::MatrixXd A = random_matrix(gen, n, n);
  return A * A.transpose() + n * Eigen::MatrixXd::Identity(n, n);
}

// Squared-exponential ARD, entry by entry.
inline double rbf(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b,
                  const Eigen::VectorXd& ls, double var) {
  double s = 0.0;
  for (int j = 0; j < a.size(); ++j) {
    const double d = (a[j] - b[j]) / ls[j];
    s += d * d;
  }
  return var * std::exp(-0.5 * s);
}

inline double matern52(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b,
                       const Eigen::VectorXd& ls, double var) {
  double s = 0.0;
  for (int j = 0; j < a.size(); ++j) {
    const double d = (a[j] - b[j]) / ls[j];
    s += d * d;
  }
  const double r = std::sqrt(s);
  return var * (1.0 + std::sqrt(5.0) * r + 5.0 * s / 3.0) * std::exp(-std::sqrt(5.0) * r);
}

inline double rational_quadratic(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b,
                                 double ls, double alpha, double var) {
  const double s = (a - b).squaredNorm();
  return var * std::pow(1.0 + s / (2.0 * alpha * ls * ls), -alpha);
}

inline double polynomial(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b, double scale,
                         double bias) {
  const double v = scale * a.dot(b) + bias;
  return v * v;
}

inline double periodic(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b, double period,
                       double ls, double var) {
  double s = 0.0;
  for (int j = 0; j < a.size(); ++j) {
    const double v = std::sin(std::numbers::pi * std::abs(a[j] - b[j]) / period);
    s += v * v;
  }
  return var * std::exp(-2.0 * s / (ls * ls));
}

template <class K>
Eigen::MatrixXd cross(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, K k) {
  Eigen::MatrixXd out(A.rows(), B.rows());
  for (int i = 0; i < A.rows(); ++i) {
    for (int j = 0; j < B.rows(); ++j) out(i, j) = k(A.row(i), B.row(j));
  }
  return out;
}

struct DensePosterior {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
};

// Solves (K + noise I) with a full-pivot LU instead of a Cholesky inverse.
template <class K>
DensePosterior posterior(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         const Eigen::MatrixXd& Q, double noise, K k) {
  const Eigen::MatrixXd G = cross(X, X, k) + noise * Eigen::MatrixXd::Identity(X.rows(), X.rows());
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(G);
  const Eigen::MatrixXd Ks = cross(X, Q, k);
  DensePosterior p;
  p.mean = Ks.transpose() * lu.solve(y);
  const Eigen::MatrixXd V = Ks.transpose() * lu.solve(Ks);
  p.variance.resize(Q.rows());
  for (int i = 0; i < Q.rows(); ++i) p.variance[i] = k(Q.row(i), Q.row(i)) - V(i, i);
  return p;
}

// Explicit inverse and determinant.
inline double nlml(const Eigen::MatrixXd& G, const Eigen::VectorXd& y) {
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(G);
  const Eigen::MatrixXd inv = lu.inverse();
  const double n = static_cast<double>(y.size());
  return 0.5 * y.dot(inv * y) + 0.5 * std::log(lu.determinant()) +
         0.5 * n * std::log(2.0 * std::numbers::pi);
}

// Normal quantile by bisection on the erfc-based CDF.
inline double normal_quantile(double p) {
  double lo = -40.0;
  double hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double cdf = 0.5 * std::erfc(-mid / std::sqrt(2.0));
    (cdf < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace oracle

#endif  // DRIFTGP_TESTS_ORACLES_HPP
