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

#include "driftgp/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "driftgp/error.hpp"

namespace driftgp {

namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxLineSearchTrials = 30;

struct Correction {
  Eigen::VectorXd s;
  Eigen::VectorXd y;
};

bool all_finite(double f, const Eigen::VectorXd& g) {
  return std::isfinite(f) && g.allFinite();
}

// Variables pinned at a face with the gradient pushing outward are held fixed.
Eigen::ArrayXd free_mask(const Eigen::VectorXd& x, const Eigen::VectorXd& g,
                         const BoxBounds& b) {
  Eigen::ArrayXd mask = Eigen::ArrayXd::Ones(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double tol = 1e-12 * (1.0 + std::abs(x[i]));
    if ((x[i] <= b.lower[i] + tol && g[i] > 0.0) || (x[i] >= b.upper[i] - tol && g[i] < 0.0)) {
      mask[i] = 0.0;
    }
  }
  return mask;
}

// Two-loop recursion restricted to the free variables.
Eigen::VectorXd quasi_newton_direction(const Eigen::VectorXd& g, const Eigen::ArrayXd& mask,
                                       const std::deque<Correction>& memory) {
  Eigen::VectorXd q = (g.array() * mask).matrix();
  std::vector<double> alpha(memory.size(), 0.0), rho(memory.size(), 0.0);
  double gamma = 1.0;
  bool have_gamma = false;
  for (std::size_t k = memory.size(); k-- > 0;) {
    const Eigen::VectorXd s = (memory[k].s.array() * mask).matrix();
    const Eigen::VectorXd y = (memory[k].y.array() * mask).matrix();
    const double sy = s.dot(y);
    if (sy <= 1e-14 * y.squaredNorm() || sy <= 0.0) continue;
    rho[k] = 1.0 / sy;
    alpha[k] = rho[k] * s.dot(q);
    q -= alpha[k] * y;
    if (!have_gamma) {
      gamma = sy / y.squaredNorm();
      have_gamma = true;
    }
  }
  Eigen::VectorXd r = gamma * q;
  for (std::size_t k = 0; k < memory.size(); ++k) {
    if (rho[k] == 0.0) continue;
    const Eigen::VectorXd s = (memory[k].s.array() * mask).matrix();
    const Eigen::VectorXd y = (memory[k].y.array() * mask).matrix();
    const double beta = rho[k] * y.dot(r);
    r += s * (alpha[k] - beta);
  }
  return -(r.array() * mask).matrix();
}

double projected_gradient_norm(const Eigen::VectorXd& x, const Eigen::VectorXd& g,
                               const BoxBounds& b) {
  return (b.project(x - g) - x).cwiseAbs().maxCoeff();
}

}  // namespace

void BoxBounds::validate() const {
  if (lower.size() != upper.size()) throw InputError("bounds have different lengths");
  if (!lower.allFinite() || !upper.allFinite()) throw InputError("bounds must be finite");
  if (!(lower.array() < upper.array()).all()) throw InputError("bounds need lower < upper");
}

Eigen::VectorXd BoxBounds::project(Eigen::VectorXd x) const {
  return x.cwiseMax(lower).cwiseMin(upper);
}

std::string_view termination_name(Termination t) noexcept {
  switch (t) {
    case Termination::kGradientTol: return "gradient-tol";
    case Termination::kFunctionTol: return "function-tol";
    case Termination::kMaxIter: return "max-iter";
    case Termination::kLineSearchFail: return "line-search-fail";
  }
  return "unknown";
}

OptimResult minimize_bounded(const Objective& objective, const Eigen::VectorXd& x0,
                             const BoxBounds& bounds, const LbfgsbSettings& settings) {
  bounds.validate();
  if (x0.size() != bounds.lower.size()) throw InputError("x0 and bounds differ in length");
  if (!x0.allFinite()) throw InputError("x0 is not finite");
  if (settings.max_evaluations < 1 || settings.memory < 1) {
    throw InputError("optimizer budget and memory must be positive");
  }

  Eigen::VectorXd x = bounds.project(x0);
  Eigen::VectorXd g(x.size());
  double f = objective(x, g);
  OptimResult result;
  result.evaluations = 1;
  if (!all_finite(f, g)) throw InputError("objective is not finite at x0");
  if (settings.on_accept) settings.on_accept(x, f);

  std::deque<Correction> memory;
  auto finish = [&](Termination t) {
    result.x_star = x;
    result.f_star = f;
    result.termination = t;
    result.converged = t == Termination::kGradientTol || t == Termination::kFunctionTol;
    return result;
  };

  for (;;) {
    if (projected_gradient_norm(x, g, bounds) <= settings.gradient_tolerance) {
      return finish(Termination::kGradientTol);
    }
    if (result.evaluations >= settings.max_evaluations) return finish(Termination::kMaxIter);

    const Eigen::ArrayXd mask = free_mask(x, g, bounds);
    Eigen::VectorXd d = quasi_newton_direction(g, mask, memory);
    if (!(g.dot(d) < 0.0) || !d.allFinite()) {
      memory.clear();
      d = -(g.array() * mask).matrix();
    }

    // Unscaled steepest descent gets a unit-length first trial.
    double step = memory.empty() ? std::min(1.0, 1.0 / d.norm()) : 1.0;
    bool accepted = false, out_of_budget = false;
    Eigen::VectorXd x_trial, g_trial(x.size());
    double f_trial = 0.0;
    for (int trial = 0; trial < kMaxLineSearchTrials; ++trial) {
      x_trial = bounds.project(x + step * d);
      const double decrease = g.dot(x_trial - x);
      if ((x_trial - x).cwiseAbs().maxCoeff() == 0.0) break;
      if (decrease < 0.0) {
        if (result.evaluations >= settings.max_evaluations) {
          out_of_budget = true;
          break;
        }
        f_trial = objective(x_trial, g_trial);
        ++result.evaluations;
        if (all_finite(f_trial, g_trial) && f_trial <= f + kArmijo * decrease) {
          accepted = true;
          break;
        }
        if (std::isfinite(f_trial)) {
          // Safeguarded quadratic interpolation along the (projected) step.
          const double curvature = f_trial - f - decrease;
          const double shrink = curvature > 0.0 ? -decrease / (2.0 * curvature) : 0.5;
          step *= std::clamp(shrink, 0.1, 0.5);
          continue;
        }
      }
      step *= 0.5;
    }

    if (!accepted) {
      if (out_of_budget) return finish(Termination::kMaxIter);
      if (!memory.empty()) {
        memory.clear();
        continue;
      }
      return finish(Termination::kLineSearchFail);
    }

    Correction c{x_trial - x, g_trial - g};
    if (c.s.dot(c.y) > 1e-10 * c.y.squaredNorm() && c.s.dot(c.y) > 0.0) {
      memory.push_back(std::move(c));
      if (static_cast<int>(memory.size()) > settings.memory) memory.pop_front();
    }
    const double relative = (f - f_trial) / std::max({std::abs(f), std::abs(f_trial), 1.0});
    x = x_trial;
    f = f_trial;
    g = g_trial;
    ++result.iterations;
    if (settings.on_accept) settings.on_accept(x, f);
    if (relative <= settings.function_tolerance) return finish(Termination::kFunctionTol);
  }
}

Objective finite_difference(std::function<double(const Eigen::VectorXd&)> f,
                            const BoxBounds& bounds, double step) {
  return [f = std::move(f), bounds, step](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
    const double value = f(x);
    grad.resize(x.size());
    Eigen::VectorXd probe = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double hi = std::min(x[i] + step, bounds.upper[i]);
      const double lo = std::max(x[i] - step, bounds.lower[i]);
      probe[i] = hi;
      const double f_hi = hi == x[i] ? value : f(probe);
      probe[i] = lo;
      const double f_lo = lo == x[i] ? value : f(probe);
      probe[i] = x[i];
      grad[i] = (f_hi - f_lo) / (hi - lo);
    }
    return value;
  };
}

Eigen::VectorXd to_coordinates(const KernelSpec& spec, const HyperparamVector& params) {
  spec.validate(params);
  Eigen::VectorXd u(params.size());
  for (int i = 0; i < spec.num_params(); ++i) {
    u[i] = spec.descriptor(i).scale == ParamScale::kLog ? std::log(params[i]) : params[i];
  }
  return u;
}

HyperparamVector from_coordinates(const KernelSpec& spec, const Eigen::VectorXd& coords) {
  if (coords.size() != spec.num_params()) throw InputError("coordinate vector has wrong length");
  Eigen::VectorXd v(coords.size());
  for (int i = 0; i < spec.num_params(); ++i) {
    const auto& h = spec.descriptor(i);
    const double raw = h.scale == ParamScale::kLog ? std::exp(coords[i]) : coords[i];
    v[i] = std::clamp(raw, h.lower, h.upper);
  }
  return HyperparamVector(std::move(v));
}

BoxBounds coordinate_bounds(const KernelSpec& spec) {
  BoxBounds b{Eigen::VectorXd(spec.num_params()), Eigen::VectorXd(spec.num_params())};
  for (int i = 0; i < spec.num_params(); ++i) {
    const auto& h = spec.descriptor(i);
    const bool log_scale = h.scale == ParamScale::kLog;
    b.lower[i] = log_scale ? std::log(h.lower) : h.lower;
    b.upper[i] = log_scale ? std::log(h.upper) : h.upper;
  }
  return b;
}

HyperoptResult optimize_hparams(const KernelSpec& spec, const HyperparamVector& start,
                                const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                const HyperoptSettings& settings) {
  HyperoptResult out{start, {}, std::numeric_limits<double>::quiet_NaN(),
                     std::numeric_limits<double>::quiet_NaN()};
  const BoxBounds bounds = coordinate_bounds(spec);
  const Eigen::VectorXd u0 = bounds.project(to_coordinates(spec, start));
  out.optim.x_star = u0;
  out.optim.converged = false;
  out.optim.termination = Termination::kLineSearchFail;

  auto value = [&](const Eigen::VectorXd& u) {
    try {
      return nlml(spec, from_coordinates(spec, u), X, y);
    } catch (const NumericalError&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  Objective objective;
  if (settings.gradient == GradientMode::kAnalytic) {
    objective = [&](const Eigen::VectorXd& u, Eigen::VectorXd& grad) {
      try {
        auto r = nlml_with_gradient(spec, from_coordinates(spec, u), X, y);
        grad = std::move(r.gradient);
        return r.value;
      } catch (const NumericalError&) {
        grad = Eigen::VectorXd::Zero(u.size());
        return std::numeric_limits<double>::infinity();
      }
    };
  } else {
    objective = finite_difference(value, bounds, settings.fd_step);
  }

  out.nlml_before = value(u0);
  if (!std::isfinite(out.nlml_before)) return out;
  out.nlml_after = out.nlml_before;

  try {
    out.optim = minimize_bounded(objective, u0, bounds, settings.lbfgsb);
  } catch (const InputError&) {
    return out;
  }
  if (out.optim.f_star < out.nlml_before) {
    out.params = from_coordinates(spec, out.optim.x_star);
    out.nlml_after = out.optim.f_star;
  }
  return out;
}

HyperoptResult optimize_hparams(const GPState& state, const HyperoptSettings& settings) {
  return optimize_hparams(state.spec, state.params, state.X, state.y, settings);
}

}  // namespace driftgp
