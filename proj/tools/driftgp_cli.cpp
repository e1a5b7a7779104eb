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

// driftgp: replay, generate and certify data streams.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "driftgp/error.hpp"
#include "driftgp/experiment.hpp"

namespace {

using driftgp::ExperimentConfig;

struct Overrides {
  std::optional<int> max_inducing;
  std::optional<std::string> gamma;
  std::optional<double> rho;
  std::optional<double> zeta;
  std::optional<double> uncertainty_threshold;
  std::optional<double> ik_threshold;
  std::optional<std::string> kpi;
  std::optional<int> initial_batch;
  std::optional<int> increment;
  std::optional<long> seed;
  std::optional<std::string> input;
  std::optional<std::string> telemetry;
  std::optional<std::string> summary;
  bool no_timing = false;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--max-inducing", o.max_inducing, "Inducing-point budget");
  cmd->add_option("--gamma", o.gamma, "Decay rate, or 'off'");
  cmd->add_option("--rho", o.rho, "Tolerated false-alarm probability");
  cmd->add_option("--zeta", o.zeta, "Safe-area threshold");
  cmd->add_option("--uncertainty-threshold", o.uncertainty_threshold, "Absorption variance threshold");
  cmd->add_option("--ik-threshold", o.ik_threshold, "Incumbent kernel tolerance");
  cmd->add_option("--kpi", o.kpi, "R2 or MSE");
  cmd->add_option("--initial-batch", o.initial_batch, "Initial batch size");
  cmd->add_option("--increment", o.increment, "Increment size");
  cmd->add_option("--seed", o.seed, "Random seed");
  cmd->add_option("--input", o.input, "CSV stream to replay");
  cmd->add_option("--telemetry", o.telemetry, "Telemetry JSONL path");
  cmd->add_option("--summary", o.summary, "Summary JSON path");
  cmd->add_flag("--no-timing", o.no_timing, "Write micros as 0");
}

// File < DRIFTGP_SEED < flags.
ExperimentConfig resolve(const std::string& path, const Overrides& o) {
  ExperimentConfig c = path.empty() ? ExperimentConfig{} : driftgp::load_config(path);
  driftgp::apply_environment(c);
  auto set = [&](const char* key, const auto& value) {
    if (value) {
      std::ostringstream s;
      s << *value;
      driftgp::apply_setting(c, key, s.str());
    }
  };
  set("model.max_inducing", o.max_inducing);
  set("model.gamma", o.gamma);
  if (o.rho) c.model.rho = *o.rho;
  if (o.zeta) c.model.zeta = *o.zeta;
  if (o.uncertainty_threshold) c.model.uncertainty_threshold = *o.uncertainty_threshold;
  if (o.ik_threshold) c.model.ik_threshold = *o.ik_threshold;
  set("model.kpi", o.kpi);
  set("schedule.initial_batch", o.initial_batch);
  set("schedule.increment", o.increment);
  set("seed", o.seed);
  set("stream.input", o.input);
  set("output.telemetry", o.telemetry);
  set("output.summary", o.summary);
  if (o.no_timing) c.timing = false;
  return c;
}

driftgp::Stream load_stream(const ExperimentConfig& c) {
  if (c.input) return driftgp::ingest_csv(*c.input);
  driftgp::StreamSpec spec = c.stream;
  spec.seed = c.seed;
  return driftgp::generate(spec);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Drift-aware online Gaussian-process regression"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides overrides;

  auto* run = app.add_subcommand("run", "Replay a stream through the model");
  run->add_option("config", config_path, "Config file")->check(CLI::ExistingFile);
  add_overrides(run, overrides);

  std::string output_path;
  auto* gen = app.add_subcommand("generate", "Write a synthetic stream as CSV");
  gen->add_option("config", config_path, "Config file")->check(CLI::ExistingFile);
  gen->add_option("-o,--output", output_path, "CSV path")->required();
  gen->add_option("--seed", overrides.seed, "Random seed");

  std::string certify_out;
  auto* cert = app.add_subcommand("certify", "Report drift metrics between consecutive concepts");
  cert->add_option("config", config_path, "Config file")->check(CLI::ExistingFile);
  cert->add_option("--input", overrides.input, "CSV stream with concept_id");
  cert->add_option("--seed", overrides.seed, "Random seed");
  cert->add_option("-o,--output", certify_out, "JSON path (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : driftgp::kExitInput;
  }

  try {
    const ExperimentConfig config = resolve(config_path, overrides);
    if (*run) {
      const auto result = driftgp::run_experiment(config);
      if (config.summary.empty()) std::cout << result.summary.dump(2) << '\n';
      if (result.exit_code != driftgp::kExitOk) {
        std::cerr << "driftgp: " << result.summary.value("error", std::string("failed")) << '\n';
      }
      return result.exit_code;
    }
    if (*gen) {
      driftgp::write_csv(load_stream(config), output_path);
      return driftgp::kExitOk;
    }
    const auto report = driftgp::certify_json(driftgp::certify(load_stream(config)));
    if (certify_out.empty()) {
      std::cout << report.dump(2) << '\n';
    } else {
      std::ofstream out(certify_out);
      if (!out) throw driftgp::InputError("cannot write '" + certify_out + "'");
      out << report.dump(2) << '\n';
    }
    return driftgp::kExitOk;
  } catch (const driftgp::InputError& e) {
    std::cerr << "driftgp: " << e.what() << '\n';
    return driftgp::kExitInput;
  } catch (const driftgp::Error& e) {
    std::cerr << "driftgp: " << e.what() << '\n';
    return driftgp::kExitNumerical;
  }
}
