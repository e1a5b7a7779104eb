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

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "driftgp/error.hpp"
#include "driftgp/experiment.hpp"

using namespace driftgp;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "driftgp_tests";
  fs::create_directories(dir);
  return dir / name;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

ExperimentConfig small_run(const std::string& tag) {
  ExperimentConfig c;
  c.stream.family = StreamFamily::kSinusoidal;
  c.stream.n_points = 300;
  c.stream.dims = 1;
  c.model.hyperopt.gradient = GradientMode::kAnalytic;
  c.model.initial_batch_size = 50;
  c.increment = 20;
  c.seed = 3;
  c.timing = false;
  c.telemetry = scratch(tag + ".jsonl").string();
  c.summary = scratch(tag + ".json").string();
  return c;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(DRIFTGP_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("documented example config parses") {
  const ExperimentConfig c = load_config(std::string(DRIFTGP_DOCS_DIR) + "/example.conf");
  CHECK(c.seed == 7);
  CHECK(c.stream.family == StreamFamily::kQuadratic);
  CHECK(c.stream.n_points == 1500);
  REQUIRE(c.stream.drift.has_value());
  CHECK(c.stream.drift->boundaries == std::vector<long>{750});
  CHECK(c.stream.drift->concepts.size() == 2);
  CHECK(c.stream.drift->concepts[1] == ConceptParams{-1.0, 1.0, 4.0, 6.0});
  CHECK(c.model.initial_kernel == "RBF");
  CHECK(c.model.kernel_pool.size() == 5);
  CHECK(c.model.gamma == 0.99);
  CHECK(c.increment == 20);
  CHECK(c.timing);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_config("model.unknown = 1"), InputError);
  CHECK_THROWS_AS(parse_config("model.rho = abc"), InputError);
  CHECK_THROWS_AS(parse_config("just words"), ParseError);
  CHECK_THROWS_AS(load_config("/nonexistent/driftgp.conf"), InputError);
  const ExperimentConfig off = parse_config("model.gamma = off  # no decay\n\n");
  CHECK_FALSE(off.model.gamma.has_value());
}

TEST_CASE("DRIFTGP_SEED overrides the file seed") {
  ExperimentConfig c = parse_config("seed = 5");
  ::setenv("DRIFTGP_SEED", "11", 1);
  apply_environment(c);
  ::unsetenv("DRIFTGP_SEED");
  CHECK(c.seed == 11);
}

TEST_CASE("CSV ingestion") {
  const fs::path p = scratch("three.csv");
  write_file(p, "t,x1,y\n0,0.5,1.0\n1,0.25,-2\n");
  const Stream s = ingest_csv(p.string());
  CHECK(s.dims() == 1);
  CHECK(s.size() == 2);
  CHECK(s.y[1] == -2.0);
  CHECK(s.t[1] == 1);

  write_file(p, "t,x1,target\n0,0.5,1.0\n");
  try {
    ingest_csv(p.string());
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("\"y\"") != std::string::npos);
  }

  write_file(p, "t,x1,y\n0,0.5,1.0\n1,abc,2.0\n");
  try {
    ingest_csv(p.string());
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.row() == 3);
  }
  CHECK_THROWS_AS(ingest_csv("/nonexistent/stream.csv"), InputError);
}

TEST_CASE("generate, write and ingest round-trip") {
  const Stream s = generate(abrupt_swap_spec(120, 3, 0.1, 9));
  const fs::path p = scratch("round.csv");
  write_csv(s, p.string());
  const Stream back = ingest_csv(p.string());
  CHECK(back.X == s.X);
  CHECK(back.y == s.y);
  CHECK(back.t == s.t);
  CHECK(back.concept_id == s.concept_id);
}

TEST_CASE("telemetry records") {
  StepReport r;
  r.batch_index = 4;
  r.mse = 0.5;
  r.r2 = std::nan("");
  r.verdict = DriftKind::kAbrupt;
  r.active_kernel = "RBF";
  r.step_micros = 123;
  const auto j = nlohmann::json::parse(telemetry_line(r, true));
  CHECK(j["batch"] == 4);
  CHECK(j["drift"] == "abrupt");
  CHECK(j["r2"].is_null());
  CHECK(j["micros"] == 123);
  CHECK(nlohmann::json::parse(telemetry_line(r, false))["micros"] == 0);
  const std::string line = telemetry_line(r, true);
  CHECK(line.find("{\"batch\":4,\"mse\":0.5,\"r2\":null,\"drift\":\"abrupt\",\"hyperopt\":false,\"kernel\":\"RBF\"") == 0);
}

TEST_CASE("experiment replay") {
  const ExperimentConfig c = small_run("replay");
  const auto result = run_experiment(c);
  REQUIRE(result.exit_code == kExitOk);
  // 240 online points: 50 initial, then 9 increments of 20 and a tail of 10.
  const auto rows = lines(read_file(c.telemetry));
  CHECK(rows.size() == 10);
  CHECK(result.reports.size() == 10);
  for (const auto& row : rows) CHECK(nlohmann::json::accept(row));

  const auto summary = nlohmann::json::parse(read_file(c.summary));
  CHECK(summary["status"] == "ok");
  CHECK(summary["max_train_index"].get<long>() < summary["test_start_index"].get<long>());
  CHECK(summary["test_start_index"] == 240);
  CHECK(summary["test"]["n"] == 60);
  CHECK(summary["test"]["r2"].get<double>() > 0.8);
}

TEST_CASE("replays are byte-identical") {
  const ExperimentConfig a = small_run("det_a");
  const ExperimentConfig b = small_run("det_b");
  REQUIRE(run_experiment(a).exit_code == kExitOk);
  REQUIRE(run_experiment(b).exit_code == kExitOk);
  CHECK(read_file(a.telemetry) == read_file(b.telemetry));
}

TEST_CASE("exit codes") {
  ExperimentConfig missing = small_run("missing");
  missing.input = "/nonexistent/stream.csv";
  CHECK(run_experiment(missing).exit_code == kExitInput);

  ExperimentConfig tiny = small_run("tiny");
  tiny.stream.n_points = 40;
  CHECK(run_experiment(tiny).exit_code == kExitInput);

  // A NaN target far from the data poisons the posterior mid-stream.
  const Stream s = generate(abrupt_swap_spec(300, 1, 0.1, 4));
  std::ostringstream csv;
  csv << "t,x1,y\n";
  for (long i = 0; i < s.size(); ++i) {
    if (i == 75) {
      csv << i << ",500,nan\n";
    } else {
      csv << i << ',' << s.X(i, 0) << ',' << s.y[i] << '\n';
    }
  }
  const fs::path p = scratch("poisoned.csv");
  write_file(p, csv.str());
  ExperimentConfig poisoned = small_run("poisoned");
  poisoned.input = p.string();
  const auto result = run_experiment(poisoned);
  CHECK(result.exit_code == kExitNumerical);
  CHECK(result.summary["status"] == "numerical_error");
  const auto rows = lines(read_file(poisoned.telemetry));
  REQUIRE(rows.size() == 2);
  CHECK(nlohmann::json::parse(rows.back()).contains("error"));
}

TEST_CASE("command line") {
  const fs::path conf = scratch("cli.conf");
  const fs::path tel = scratch("cli.jsonl");
  const fs::path sum = scratch("cli.json");
  write_file(conf,
             "stream.family = sinusoidal\nstream.points = 200\nmodel.gradient = analytic\n"
             "output.telemetry = " + tel.string() + "\noutput.summary = " + sum.string() + "\n");
  CHECK(run_cli("run " + conf.string() + " --no-timing --increment 30") == 0);
  CHECK(lines(read_file(tel)).size() == 4);
  CHECK(nlohmann::json::parse(read_file(sum))["status"] == "ok");

  CHECK(run_cli("run " + conf.string() + " --input /nonexistent/stream.csv") == 2);
  CHECK(run_cli("run /nonexistent/config.conf") == 2);
  CHECK(run_cli("run " + conf.string() + " --kpi Accuracy") == 2);

  const fs::path csv = scratch("cli.csv");
  CHECK(run_cli("generate " + conf.string() + " -o " + csv.string()) == 0);
  CHECK(ingest_csv(csv.string()).size() == 200);

  const fs::path cert = scratch("cli_cert.json");
  write_file(conf, "stream.family = quadratic\nstream.points = 400\nstream.drift.kind = abrupt\n"
                   "stream.drift.boundaries = 200\nstream.concept.1.offset = 3\n");
  CHECK(run_cli("certify " + conf.string() + " -o " + cert.string()) == 0);
  const auto report = nlohmann::json::parse(read_file(cert));
  CHECK(report["applicable"] == true);
  CHECK(report["pairs"][0]["y_ks_pvalue"].get<double>() < 1e-6);
}
