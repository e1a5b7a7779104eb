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

#include "driftgp/model.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <span>

#include "driftgp/error.hpp"
#include "driftgp/inducing.hpp"

namespace driftgp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::span<const double> as_span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

bool constant(const Eigen::VectorXd& v) {
  return v.size() == 0 || (v.array() == v[0]).all();
}

// Validation KPI, or NaN when R^2 is undefined.
double validation_kpi(KpiKind kind, const Eigen::VectorXd& y, const Eigen::VectorXd& pred) {
  try {
    return kpi_value(kind, as_span(y), as_span(pred));
  } catch (const UndefinedVarianceError&) {
    return kNaN;
  }
}

std::vector<std::int64_t> zero_stamps(Eigen::Index n) {
  return std::vector<std::int64_t>(static_cast<std::size_t>(n), 0);
}

}  // namespace

void ModelConfig::validate() const {
  auto fail = [](const std::string& what) { throw InputError("model config: " + what); };
  if (max_inducing < 1) fail("max_inducing must be >= 1");
  if (gamma && !(*gamma >= 0.0)) fail("gamma must be >= 0");
  if (initial_kernel != "auto" && !parse_family(initial_kernel)) {
    fail("unknown initial_kernel '" + initial_kernel + "'");
  }
  if (!(ik_threshold >= 0.0)) fail("ik_threshold must be >= 0");
  if (kernel_pool.empty()) fail("kernel_pool must not be empty");
  for (const auto& name : kernel_pool) {
    if (!parse_family(name)) fail("unknown kernel '" + name + "' in pool");
  }
  if (!(uncertainty_threshold >= 0.0)) fail("uncertainty_threshold must be >= 0");
  if (!(zeta >= 0.0)) fail("zeta must be >= 0");
  if (initial_batch_size < 2) fail("initial_batch_size must be >= 2");
  if (!(rho > 0.0 && rho < 0.5)) fail("rho must lie in (0, 0.5)");
  if (window_lb < 1 || window_lb > window_ub) fail("window bounds need 1 <= LB <= UB");
  if (window_points < 1 || increment_size < 1) fail("window sizing needs N, K >= 1");
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) fail("val_fraction must lie in (0, 1)");
}

BatchSplit split_batch(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double val_fraction) {
  const Eigen::Index n = X.rows();
  if (n == 0) throw InputError("empty batch");
  if (y.size() != n) throw InputError("batch X and y differ in length");
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) throw InputError("val_fraction outside [0, 1)");

  const double raw = (1.0 - val_fraction) * static_cast<double>(n);
  auto n_tr = static_cast<Eigen::Index>(std::ceil(raw - 1e-9));
  n_tr = std::clamp<Eigen::Index>(n_tr, 1, n);

  BatchSplit s;
  s.X_tr = X.topRows(n_tr);
  s.y_tr = y.head(n_tr);
  if (n_tr == n) {
    s.X_vl = s.X_tr;
    s.y_vl = s.y_tr;
  } else {
    s.X_vl = X.bottomRows(n - n_tr);
    s.y_vl = y.tail(n - n_tr);
  }
  return s;
}

KernelChoice pick_best_kernel(const Eigen::MatrixXd& X_tr, const Eigen::VectorXd& y_tr,
                              const Eigen::MatrixXd& X_vl, const Eigen::VectorXd& y_vl,
                              const std::optional<Incumbent>& incumbent,
                              const ModelConfig& config) {
  if (X_tr.rows() < 2) throw InputError("kernel selection needs at least two training points");
  const int dim = static_cast<int>(X_tr.cols());

  std::vector<KernelSpec> candidates;
  for (const auto& name : config.kernel_pool) candidates.push_back(kernel_by_name(name, dim));
  std::optional<std::size_t> incumbent_index;
  if (incumbent) {
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (candidates[i].family() == incumbent->spec.family()) incumbent_index = i;
    }
    if (!incumbent_index) {
      candidates.push_back(incumbent->spec);
      incumbent_index = candidates.size() - 1;
    }
  }

  // R^2 depends only on the targets for definedness; rank by MSE when it is not.
  const KpiKind ranking =
      config.kpi == KpiKind::kR2 && constant(y_vl) ? KpiKind::kMse : config.kpi;

  struct Fit {
    HyperparamVector params;
    double kpi;
    double goodness;
  };
  std::vector<std::optional<Fit>> fits(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const KernelSpec& spec = candidates[i];
    const HyperparamVector start = incumbent_index == i ? incumbent->params : spec.initial_params();
    try {
      const auto opt = optimize_hparams(spec, start, X_tr, y_tr, config.hyperopt);
      const GPState state = make_state(spec, opt.params, X_tr, y_tr, zero_stamps(X_tr.rows()));
      const Eigen::VectorXd pred = posterior(state, X_vl).mean;
      if (!pred.allFinite()) continue;
      const double score = validation_kpi(ranking, y_vl, pred);
      const double goodness = higher_is_better(ranking) ? score : -score;
      if (!std::isfinite(goodness)) continue;
      fits[i] = Fit{opt.params, validation_kpi(config.kpi, y_vl, pred), goodness};
    } catch (const NumericalError&) {
    }
  }

  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < fits.size(); ++i) {
    if (fits[i] && (!best || fits[i]->goodness > fits[*best]->goodness)) best = i;
  }
  if (!best) throw NumericalError("kernel selection failed: no candidate could be fitted");

  std::size_t winner = *best;
  if (incumbent_index && fits[*incumbent_index] &&
      fits[*best]->goodness - fits[*incumbent_index]->goodness <= config.ik_threshold) {
    winner = *incumbent_index;
  }

  KernelChoice choice{candidates[winner], fits[winner]->params, fits[winner]->kpi, {}};
  for (const auto& f : fits) choice.candidate_kpis.push_back(f ? f->kpi : kNaN);
  return choice;
}

DaoModel::DaoModel(ModelConfig config, const Eigen::MatrixXd& X, const Eigen::VectorXd& y)
    : config_(std::move(config)),
      window_(static_cast<std::size_t>(window_capacity(config_.window_points,
                                                       config_.increment_size,
                                                       config_.window_lb, config_.window_ub))) {
  config_.validate();
  if (X.rows() != y.size()) throw InputError("base X and y differ in length");
  if (X.rows() < config_.initial_batch_size) {
    throw InputError("base batch smaller than initial_batch_size");
  }
  if (!X.allFinite() || !y.allFinite()) throw InputError("base batch contains non-finite values");

  const BatchSplit split = split_batch(X, y, config_.val_fraction);
  std::optional<Incumbent> incumbent;
  if (config_.initial_kernel != "auto") {
    KernelSpec spec = kernel_by_name(config_.initial_kernel, static_cast<int>(X.cols()));
    HyperparamVector params = spec.initial_params();
    incumbent = Incumbent{std::move(spec), std::move(params)};
  }
  KernelChoice choice =
      pick_best_kernel(split.X_tr, split.y_tr, split.X_vl, split.y_vl, incumbent, config_);
  state_ = std::make_shared<const GPState>(make_state(std::move(choice.spec), std::move(choice.params),
                                                      split.X_tr, split.y_tr,
                                                      zero_stamps(split.X_tr.rows())));
  initial_kpi_ = choice.kpi;
  if (std::isfinite(choice.kpi)) window_.push(choice.kpi);
}

DaoModel::DaoModel(const DaoModel& other)
    : config_(other.config_),
      state_(other.snapshot()),
      window_(other.window_),
      batch_index_(other.batch_index_),
      initial_kpi_(other.initial_kpi_) {}

DaoModel& DaoModel::operator=(const DaoModel& other) {
  if (this == &other) return *this;
  auto snap = other.snapshot();
  std::lock_guard lock(state_mutex_);
  config_ = other.config_;
  state_ = std::move(snap);
  window_ = other.window_;
  batch_index_ = other.batch_index_;
  initial_kpi_ = other.initial_kpi_;
  return *this;
}

std::shared_ptr<const GPState> DaoModel::snapshot() const {
  std::lock_guard lock(state_mutex_);
  return state_;
}

Posterior DaoModel::predict(const Eigen::MatrixXd& X_query) const {
  return posterior(*snapshot(), X_query);
}

bool DaoModel::same_state(const DaoModel& other) const {
  const GPState& a = *state_;
  const GPState& b = *other.state_;
  auto same_matrix = [](const Eigen::MatrixXd& p, const Eigen::MatrixXd& q) {
    return p.rows() == q.rows() && p.cols() == q.cols() &&
           std::equal(p.data(), p.data() + p.size(), q.data());
  };
  return a.spec.family() == b.spec.family() && a.params == b.params && same_matrix(a.X, b.X) &&
         same_matrix(a.y, b.y) && a.t == b.t && same_matrix(a.K, b.K) &&
         same_matrix(a.K_inv, b.K_inv) && a.jitter == b.jitter && window_ == other.window_ &&
         batch_index_ == other.batch_index_;
}

StepReport DaoModel::update(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (X.rows() == 0) throw InputError("empty batch");
  if (X.rows() != y.size()) throw InputError("batch X and y differ in length");
  if (X.cols() != state_->X.cols()) throw InputError("batch has the wrong number of features");
  if (!X.allFinite()) throw InputError("batch inputs contain non-finite values");

  const auto start = std::chrono::steady_clock::now();
  StepReport report;
  try {
    report = step(X, y);
  } catch (const Error& e) {
    report = StepReport{};
    report.batch_index = batch_index_ + 1;
    report.error = e.what();
    report.active_kernel = std::string(state_->spec.name());
    report.inducing_count = static_cast<int>(state_->size());
  }
  report.step_micros = std::chrono::duration_cast<std::chrono::microseconds>(
                           std::chrono::steady_clock::now() - start)
                           .count();
  return report;
}

StepReport DaoModel::step(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  const std::int64_t t_now = batch_index_ + 1;
  GPState work = *state_;
  KpiWindow window = window_;

  StepReport report;
  report.batch_index = t_now;
  const BatchSplit split = split_batch(X, y, config_.val_fraction);

  // Absorb training rows the current model is uncertain about.
  for (Eigen::Index i = 0; i < split.X_tr.rows(); ++i) {
    const Eigen::MatrixXd xi = split.X_tr.row(i);
    if (posterior(work, xi).variance[0] > config_.uncertainty_threshold) {
      work = append_point(std::move(work), split.X_tr.row(i), split.y_tr[i], t_now);
      ++report.absorbed_count;
    }
  }

  auto evaluate = [&](const GPState& s) {
    Eigen::VectorXd mean = posterior(s, split.X_vl).mean;
    if (!mean.allFinite()) throw NumericalError("non-finite predictive mean");
    return mean;
  };

  const Eigen::VectorXd pred = evaluate(work);
  report.val_targets.assign(split.y_vl.data(), split.y_vl.data() + split.y_vl.size());
  report.val_predictions.assign(pred.data(), pred.data() + pred.size());
  report.mse = kpi_mse(as_span(split.y_vl), as_span(pred));
  report.r2 = validation_kpi(KpiKind::kR2, split.y_vl, pred);
  const double inst = config_.kpi == KpiKind::kR2 ? report.r2 : report.mse;

  if (std::isfinite(inst)) {
    window.push(inst);
    // Drift logic needs two baseline entries besides the instant one.
    if (window.size() >= 3) {
      const DriftLimits limits = measure(window, config_.rho);
      const DriftVerdict first = classify(inst, limits, config_.zeta, config_.kpi);
      report.verdict = first.kind;
      if (first.kind != DriftKind::kNone) {
        window.remove_last();
        const HyperoptResult opt = optimize_hparams(work, config_.hyperopt);
        report.hyperopt_ran = true;
        if (!(opt.params == work.params)) {
          work = make_state(work.spec, opt.params, std::move(work.X), std::move(work.y),
                            std::move(work.t));
        }
        const double refit = validation_kpi(config_.kpi, split.y_vl, evaluate(work));
        window.push(refit);
        const DriftVerdict second = classify(refit, limits, config_.zeta, config_.kpi);
        report.verdict_after_hyperopt = second.kind;

        if (first.kind == DriftKind::kAbrupt && second.kind == DriftKind::kAbrupt) {
          window.remove_last();
          KernelChoice choice = pick_best_kernel(work.X, work.y, split.X_vl, split.y_vl,
                                                 Incumbent{work.spec, work.params}, config_);
          report.kernel_reselected = true;
          report.kernel_switched = choice.spec.family() != work.spec.family();
          work = make_state(std::move(choice.spec), std::move(choice.params), std::move(work.X),
                            std::move(work.y), std::move(work.t));
          if (std::isfinite(choice.kpi)) window.push(choice.kpi);
        }
      }
    }
  }

  work = select_inducing(std::move(work), config_.max_inducing, config_.gamma, t_now);
  if (inverse_residual(work) > kInverseTolerance) work = refresh_inverse(std::move(work));

  report.active_kernel = std::string(work.spec.name());
  report.inducing_count = static_cast<int>(work.size());
  {
    std::lock_guard lock(state_mutex_);
    state_ = std::make_shared<const GPState>(std::move(work));
  }
  window_ = std::move(window);
  batch_index_ = t_now;
  return report;
}

}  // namespace driftgp
