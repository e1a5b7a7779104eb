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

#include "driftgp/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "driftgp/error.hpp"

namespace driftgp {

using nlohmann::ordered_json;

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty()) {
    throw InputError("config: '" + key + "' expects a number, got '" + v + "'");
  }
  return out;
}

long to_long(const std::string& key, const std::string& v) {
  long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty()) {
    throw InputError("config: '" + key + "' expects an integer, got '" + v + "'");
  }
  return out;
}

int to_int(const std::string& key, const std::string& v) { return static_cast<int>(to_long(key, v)); }

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  throw InputError("config: '" + key + "' expects true or false, got '" + v + "'");
}

DriftSchedule& drift_of(ExperimentConfig& c) {
  if (!c.stream.drift) c.stream.drift = DriftSchedule{};
  return *c.stream.drift;
}

ConceptParams& concept_at(ExperimentConfig& c, std::size_t index) {
  auto& concepts = drift_of(c).concepts;
  if (concepts.size() <= index) concepts.resize(index + 1);
  return concepts[index];
}

ordered_json number_or_null(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(); }

double percentile(std::vector<std::int64_t> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  return static_cast<double>(v[lo]) + (pos - static_cast<double>(lo)) * static_cast<double>(v[hi] - v[lo]);
}

}  // namespace

void apply_setting(ExperimentConfig& c, const std::string& key, const std::string& value) {
  ModelConfig& m = c.model;
  if (key == "seed") {
    c.seed = static_cast<std::uint64_t>(to_long(key, value));
  } else if (key == "stream.family") {
    auto f = parse_stream_family(value);
    if (!f) throw InputError("config: unknown stream.family '" + value + "'");
    c.stream.family = *f;
  } else if (key == "stream.points") {
    c.stream.n_points = to_long(key, value);
  } else if (key == "stream.dims") {
    c.stream.dims = to_int(key, value);
  } else if (key == "stream.noise") {
    c.stream.noise_sd = to_double(key, value);
  } else if (key == "stream.input") {
    c.input = value;
  } else if (key == "stream.drift.kind") {
    if (value == "none") {
      c.stream.drift.reset();
      return;
    }
    auto p = parse_drift_pattern(value);
    if (!p) throw InputError("config: unknown stream.drift.kind '" + value + "'");
    drift_of(c).kind = *p;
  } else if (key == "stream.drift.boundaries") {
    auto& b = drift_of(c).boundaries;
    b.clear();
    for (const auto& item : split(value, ',')) b.push_back(to_long(key, item));
  } else if (key == "stream.drift.transition") {
    drift_of(c).transition = to_long(key, value);
  } else if (key.rfind("stream.concept.", 0) == 0) {
    const auto parts = split(key.substr(15), '.');
    if (parts.size() != 2) throw InputError("config: malformed key '" + key + "'");
    const long index = to_long(key, parts[0]);
    if (index < 0 || index > 1000) throw InputError("config: concept index out of range in '" + key + "'");
    ConceptParams& cp = concept_at(c, static_cast<std::size_t>(index));
    const double v = to_double(key, value);
    if (parts[1] == "amplitude") {
      cp.amplitude = v;
    } else if (parts[1] == "frequency") {
      cp.frequency = v;
    } else if (parts[1] == "offset") {
      cp.offset = v;
    } else if (parts[1] == "shift") {
      cp.shift = v;
    } else {
      throw InputError("config: unknown concept field in '" + key + "'");
    }
  } else if (key == "model.max_inducing") {
    m.max_inducing = to_int(key, value);
  } else if (key == "model.gamma") {
    if (value == "off") {
      m.gamma.reset();
    } else {
      m.gamma = to_double(key, value);
    }
  } else if (key == "model.initial_kernel") {
    m.initial_kernel = value;
  } else if (key == "model.ik_threshold") {
    m.ik_threshold = to_double(key, value);
  } else if (key == "model.kernel_pool") {
    m.kernel_pool = split(value, ',');
  } else if (key == "model.uncertainty_threshold") {
    m.uncertainty_threshold = to_double(key, value);
  } else if (key == "model.zeta") {
    m.zeta = to_double(key, value);
  } else if (key == "model.rho") {
    m.rho = to_double(key, value);
  } else if (key == "model.kpi") {
    auto k = parse_kpi(value);
    if (!k) throw InputError("config: unknown model.kpi '" + value + "'");
    m.kpi = *k;
  } else if (key == "model.window_lb") {
    m.window_lb = to_int(key, value);
  } else if (key == "model.window_ub") {
    m.window_ub = to_int(key, value);
  } else if (key == "model.window_points") {
    c.window_points = to_long(key, value);
  } else if (key == "model.val_fraction") {
    m.val_fraction = to_double(key, value);
  } else if (key == "model.gradient") {
    if (value == "finite-difference") {
      m.hyperopt.gradient = GradientMode::kFiniteDifference;
    } else if (value == "analytic") {
      m.hyperopt.gradient = GradientMode::kAnalytic;
    } else {
      throw InputError("config: model.gradient must be finite-difference or analytic");
    }
  } else if (key == "model.max_evaluations") {
    m.hyperopt.lbfgsb.max_evaluations = to_int(key, value);
  } else if (key == "schedule.initial_batch") {
    m.initial_batch_size = to_int(key, value);
  } else if (key == "schedule.increment") {
    c.increment = to_int(key, value);
  } else if (key == "output.telemetry") {
    c.telemetry = value;
  } else if (key == "output.summary") {
    c.summary = value;
  } else if (key == "output.timing") {
    c.timing = to_bool(key, value);
  } else {
    throw InputError("config: unknown key '" + key + "'");
  }
}

ExperimentConfig parse_config(const std::string& text, ExperimentConfig base) {
  std::stringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError("config line " + std::to_string(number) + ": expected key = value", number);
    }
    apply_setting(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return base;
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), std::move(base));
}

void apply_environment(ExperimentConfig& config) {
  if (const char* seed = std::getenv("DRIFTGP_SEED"); seed != nullptr && *seed != '\0') {
    config.seed = static_cast<std::uint64_t>(to_long("DRIFTGP_SEED", seed));
  }
}

Stream ingest_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read input file '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty file: header row missing", 1);
  const std::vector<std::string> header = split(trim(line), ',');
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < header.size(); ++i) index[header[i]] = i;

  auto require = [&](const std::string& name) {
    auto it = index.find(name);
    if (it == index.end()) throw ParseError("missing column \"" + name + "\"", 1);
    return it->second;
  };
  const std::size_t t_col = require("t");
  const std::size_t y_col = require("y");
  std::vector<std::size_t> x_cols{require("x1")};
  while (index.count("x" + std::to_string(x_cols.size() + 1)) != 0) {
    x_cols.push_back(index["x" + std::to_string(x_cols.size() + 1)]);
  }
  const auto concept_it = index.find("concept_id");

  std::vector<std::vector<double>> xs;
  std::vector<double> ys;
  Stream s;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    line = trim(line);
    if (line.empty()) continue;
    const std::vector<std::string> cells = split(line, ',');
    if (cells.size() != header.size()) {
      throw ParseError("row " + std::to_string(row) + ": expected " + std::to_string(header.size()) +
                           " fields, got " + std::to_string(cells.size()),
                       row);
    }
    auto number = [&](std::size_t col) {
      const std::string& v = cells[col];
      double out = 0.0;
      const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
      if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size()) {
        throw ParseError("row " + std::to_string(row) + ": non-numeric value '" + v + "' in column \"" +
                             header[col] + "\"",
                         row);
      }
      return out;
    };
    auto integer = [&](std::size_t col) {
      const std::string& v = cells[col];
      std::int64_t out = 0;
      const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
      if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size()) {
        throw ParseError("row " + std::to_string(row) + ": non-integer value '" + v + "' in column \"" +
                             header[col] + "\"",
                         row);
      }
      return out;
    };
    s.t.push_back(integer(t_col));
    std::vector<double> x;
    for (std::size_t c : x_cols) x.push_back(number(c));
    xs.push_back(std::move(x));
    ys.push_back(number(y_col));
    s.concept_id.push_back(concept_it != index.end() ? static_cast<int>(integer(concept_it->second)) : 0);
  }

  const auto n = static_cast<Eigen::Index>(xs.size());
  s.X.resize(n, static_cast<Eigen::Index>(x_cols.size()));
  s.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < x_cols.size(); ++j) {
      s.X(i, static_cast<Eigen::Index>(j)) = xs[static_cast<std::size_t>(i)][j];
    }
    s.y[i] = ys[static_cast<std::size_t>(i)];
  }
  return s;
}

void write_csv(const Stream& stream, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << "t";
  for (int j = 1; j <= stream.dims(); ++j) out << ",x" << j;
  out << ",y,concept_id\n";
  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << ',' << buf;
  };
  for (long i = 0; i < stream.size(); ++i) {
    out << stream.t[static_cast<std::size_t>(i)];
    for (int j = 0; j < stream.dims(); ++j) put(stream.X(i, j));
    put(stream.y[i]);
    out << ',' << stream.concept_id[static_cast<std::size_t>(i)] << '\n';
  }
  if (!out) throw InputError("failed writing '" + path + "'");
}

std::string telemetry_line(const StepReport& r, bool timing) {
  ordered_json j;
  j["batch"] = r.batch_index;
  j["mse"] = number_or_null(r.mse);
  j["r2"] = number_or_null(r.r2);
  j["drift"] = std::string(drift_name(r.verdict));
  j["hyperopt"] = r.hyperopt_ran;
  j["kernel"] = r.active_kernel;
  j["inducing"] = r.inducing_count;
  j["absorbed"] = r.absorbed_count;
  j["micros"] = timing ? r.step_micros : 0;
  if (r.error) j["error"] = *r.error;
  return j.dump();
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  ExperimentResult result;
  ordered_json& summary = result.summary;
  summary["status"] = "ok";

  auto fail = [&](int code, const std::string& status, const std::string& message) {
    result.exit_code = code;
    summary["status"] = status;
    summary["error"] = message;
  };

  auto write_summary = [&]() {
    if (config.summary.empty()) return;
    std::ofstream out(config.summary);
    if (out) out << summary.dump(2) << '\n';
  };

  // Stream acquisition and configuration errors map to the input exit code.
  Stream stream;
  ModelConfig model_config = config.model;
  long n_online = 0;
  try {
    if (config.increment < 1) throw InputError("config: schedule.increment must be >= 1");
    if (config.input) {
      stream = ingest_csv(*config.input);
    } else {
      StreamSpec spec = config.stream;
      spec.seed = config.seed;
      stream = generate(spec);
    }
    n_online = static_cast<long>(std::floor(0.8 * static_cast<double>(stream.size()) + 1e-9));
    if (n_online < model_config.initial_batch_size || n_online >= stream.size()) {
      throw InputError("stream too short for the initial batch plus a held-out test segment");
    }
    model_config.increment_size = config.increment;
    model_config.window_points = config.window_points.value_or(n_online);
    model_config.validate();
  } catch (const InputError& e) {
    fail(kExitInput, "input_error", e.what());
    write_summary();
    return result;
  }

  std::ofstream telemetry;
  if (!config.telemetry.empty()) {
    telemetry.open(config.telemetry);
    if (!telemetry) {
      fail(kExitInput, "input_error", "cannot write telemetry file '" + config.telemetry + "'");
      write_summary();
      return result;
    }
  }

  const long test_start = n_online;
  std::int64_t max_seen = -1;
  auto feed_rows = [&](long begin, long end) {
    // Leakage guard: nothing from the test segment reaches the model early.
    if (end > test_start) throw StateError("online replay reached the test segment");
    for (long i = begin; i < end; ++i) max_seen = std::max<std::int64_t>(max_seen, i);
  };

  ordered_json drift_events = ordered_json::array();
  ordered_json kernel_switches = ordered_json::array();
  std::vector<std::int64_t> micros;
  int hyperopt_batches = 0;

  std::optional<DaoModel> model;
  try {
    const long init = model_config.initial_batch_size;
    feed_rows(0, init);
    model.emplace(model_config, stream.X.topRows(init), stream.y.head(init));
    summary["initial_kernel"] = std::string(model->state().spec.name());

    for (long begin = init; begin < n_online; begin += config.increment) {
      const long end = std::min<long>(begin + config.increment, n_online);
      feed_rows(begin, end);
      const std::string before = std::string(model->state().spec.name());
      StepReport report = model->update(stream.X.middleRows(begin, end - begin),
                                        stream.y.segment(begin, end - begin));
      if (telemetry.is_open()) telemetry << telemetry_line(report, config.timing) << '\n' << std::flush;
      micros.push_back(config.timing ? report.step_micros : 0);
      if (report.hyperopt_ran) ++hyperopt_batches;
      if (report.verdict != DriftKind::kNone) {
        ordered_json ev;
        ev["batch"] = report.batch_index;
        ev["kind"] = std::string(drift_name(report.verdict));
        ev["after_hyperopt"] = report.verdict_after_hyperopt
                                   ? ordered_json(std::string(drift_name(*report.verdict_after_hyperopt)))
                                   : ordered_json();
        drift_events.push_back(ev);
      }
      if (report.kernel_switched) {
        kernel_switches.push_back(
            {{"batch", report.batch_index}, {"from", before}, {"to", report.active_kernel}});
      }
      const bool failed = report.error.has_value();
      const std::string message = failed ? *report.error : "";
      result.reports.push_back(std::move(report));
      if (failed) throw NumericalError("batch " + std::to_string(result.reports.back().batch_index) + ": " + message);
    }

    summary["final_kernel"] = std::string(model->state().spec.name());
    const Eigen::MatrixXd X_test = stream.X.bottomRows(stream.size() - test_start);
    const Eigen::VectorXd y_test = stream.y.tail(stream.size() - test_start);
    const Posterior post = model->predict(X_test);
    if (!post.mean.allFinite()) throw NumericalError("non-finite test predictions");
    const std::span<const double> yt(y_test.data(), static_cast<std::size_t>(y_test.size()));
    const std::span<const double> yp(post.mean.data(), static_cast<std::size_t>(post.mean.size()));
    ordered_json test;
    test["n"] = y_test.size();
    test["mse"] = kpi_mse(yt, yp);
    try {
      test["r2"] = kpi_r2(yt, yp);
    } catch (const UndefinedVarianceError&) {
      test["r2"] = nullptr;
    }
    summary["test"] = test;
  } catch (const InputError& e) {
    fail(kExitInput, "input_error", e.what());
  } catch (const Error& e) {
    fail(kExitNumerical, "numerical_error", e.what());
  }

  if (model) result.final_state = model->snapshot();
  summary["batches"] = result.reports.size();
  summary["hyperopt_batches"] = hyperopt_batches;
  summary["drift_events"] = drift_events;
  summary["kernel_switches"] = kernel_switches;
  summary["timing_micros"] = {{"p50", percentile(micros, 0.5)},
                              {"p90", percentile(micros, 0.9)},
                              {"p99", percentile(micros, 0.99)}};
  summary["max_train_index"] = max_seen;
  summary["test_start_index"] = test_start;
  summary["exit_code"] = result.exit_code;
  write_summary();
  return result;
}

ordered_json certify_json(const CertifyReport& report) {
  ordered_json j;
  j["applicable"] = report.applicable;
  ordered_json pairs = ordered_json::array();
  for (const auto& p : report.pairs) {
    ordered_json e;
    e["from"] = p.from;
    e["to"] = p.to;
    e["y_ks_pvalue"] = p.y_ks_pvalue;
    e["y_js_divergence"] = p.y_js;
    e["y_wasserstein_norm"] = p.y_wasserstein;
    e["x_any_ks_sig"] = p.x_any_ks_sig;
    e["x_min_ks_pvalue"] = p.x_min_ks_pvalue;
    e["x_mean_js_divergence"] = p.x_mean_js;
    pairs.push_back(e);
  }
  j["pairs"] = pairs;
  return j;
}

}  // namespace driftgp
