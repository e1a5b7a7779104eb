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

#ifndef DRIFTGP_EXPERIMENT_HPP
#define DRIFTGP_EXPERIMENT_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "driftgp/datagen.hpp"
#include "driftgp/model.hpp"

namespace driftgp {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumerical = 3;

struct ExperimentConfig {
  ModelConfig model;
  StreamSpec stream;
  // CSV stream to replay instead of generating one.
  std::optional<std::string> input;
  int increment = 20;
  // Window sizing N; defaults to the length of the online segment.
  std::optional<long> window_points;
  std::string telemetry;
  std::string summary;
  // false writes micros as 0 so telemetry is byte-reproducible.
  bool timing = true;
  std::uint64_t seed = 0;
};

// Applies one dotted `key = value` setting. Throws InputError on unknown keys
// or malformed values.
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value);

// Parses flat `key = value` text; `#` starts a comment.
ExperimentConfig parse_config(const std::string& text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {});

// DRIFTGP_SEED, when set, replaces the configured seed.
void apply_environment(ExperimentConfig& config);

// Columns: t, x1..xd, y and optionally concept_id, in any order.
Stream ingest_csv(const std::string& path);
void write_csv(const Stream& stream, const std::string& path);

// One telemetry record (no trailing newline).
std::string telemetry_line(const StepReport& report, bool timing);

struct ExperimentResult {
  int exit_code = kExitOk;
  nlohmann::ordered_json summary;
  std::vector<StepReport> reports;
  // Model state after the online phase; null when initialization failed.
  std::shared_ptr<const GPState> final_state;
};

// Splits the stream 80/20 in time, replays the online part through DaoModel
// and scores the held-out tail once at the end.
ExperimentResult run_experiment(const ExperimentConfig& config);

nlohmann::ordered_json certify_json(const CertifyReport& report);

}  // namespace driftgp

#endif  // DRIFTGP_EXPERIMENT_HPP
