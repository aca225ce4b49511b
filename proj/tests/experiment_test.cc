// Copyright 2026 The FairDP Authors.
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

#include "fairdp/experiment.h"

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "fairdp/error.h"
#include "oracles.h"

namespace fairdp::experiment {
namespace {

namespace fs = std::filesystem;

// A scratch directory removed at scope exit.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag)
      : path_(fs::temp_directory_path() /
              ("fairdp_" + tag + "_" + std::to_string(::getpid()))) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~ScratchDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

std::string write_synthetic(const ScratchDir& dir, const oracle::SyntheticSpec& spec) {
  const std::string path = dir / "data.csv";
  write_text(path, oracle::synthetic_csv(spec));
  return path;
}

ExperimentSpec base_spec(const std::string& csv) {
  ExperimentSpec spec;
  spec.dataset = csv;
  spec.schema.protected_columns = {"group"};
  spec.schema.label_column = "label";
  spec.train.steps = 50;
  spec.train.q = 0.1;
  spec.train.hidden_dims = {8};
  spec.train.seed = 21;
  spec.train.clip_m = 0.7;
  spec.clip_m_set = true;
  spec.target_epsilon = 2.0;
  return spec;
}

TEST_CASE("names and spec validation") {
  for (auto m : {Mechanism::kFairDP, Mechanism::kDpsgd, Mechanism::kDpsgdSmooth,
                 Mechanism::kFairFM, Mechanism::kFairFMSmooth}) {
    CHECK(ParseMechanism(MechanismName(m)) == m);
  }
  CHECK_THROWS_AS(ParseMechanism("dpsgdf"), Error);
  CHECK(ParseSweepAxis("M") == SweepAxis::kClipM);
  CHECK_THROWS_AS(ParseSweepAxis("sigma"), Error);

  ExperimentSpec spec = base_spec("x.csv");
  CHECK_NOTHROW(spec.validate());
  spec.mechanism = Mechanism::kFairFM;
  spec.target_epsilon.reset();
  CHECK_THROWS_AS(spec.validate(), Error);
  spec = base_spec("x.csv");
  spec.schema.protected_columns.clear();
  CHECK_THROWS_AS(spec.validate(), Error);
  spec = base_spec("x.csv");
  spec.rho = 0.5;
  CHECK_THROWS_AS(spec.validate(), Error);
}

TEST_CASE("spec json round trip") {
  ExperimentSpec spec = base_spec("data.csv");
  spec.rho = 2.0;
  spec.metrics = {metrics::FairnessMetric::kEqualOdds};
  spec.certificate_metric = metrics::FairnessMetric::kEqualOpportunity;
  const auto j = to_json(spec);
  CHECK(to_json(spec_from_json(j)) == j);
  spec.train.clip_m = std::numeric_limits<double>::infinity();
  CHECK(to_json(spec_from_json(to_json(spec))) == to_json(spec));
  CHECK_THROWS_AS(spec_from_json(nlohmann::json::object()), Error);
}

TEST_CASE("train writes a complete, reproducible run") {
  ScratchDir dir("run");
  oracle::SyntheticSpec data_spec;
  const std::string csv = write_synthetic(dir, data_spec);
  ExperimentSpec spec = base_spec(csv);
  spec.out = dir / "a";
  const RunResult run = run_experiment(spec);
  write_run(run);
  for (const char* f : {"checkpoint.json", "train_log.jsonl", "privacy.json", "certificate.json",
                        "metrics.json", "metrics.csv", "spec.json"}) {
    CHECK(fs::exists(fs::path(spec.out) / f));
  }
  CHECK(run.epsilon <= 2.0);
  CHECK(run.epsilon >= 0.99 * 2.0);
  REQUIRE(run.certificate.has_value());
  CHECK(run.certificate->per_group_p_emp.size() == 2);
  CHECK(run.certificate->tau_empirical <= run.certificate->tau_norm);
  CHECK(run.certificate->tau_norm <= run.certificate->tau_theoretical);

  // Replay from the stored spec into a second directory.
  ExperimentSpec replay = spec_from_json(nlohmann::json::parse(read_text(spec.out + "/spec.json")));
  replay.out = dir / "b";
  write_run(run_experiment(replay));
  for (const char* f : {"metrics.json", "certificate.json", "checkpoint.json", "train_log.jsonl",
                        "privacy.json", "metrics.csv"}) {
    CHECK(read_text(spec.out + "/" + f) == read_text(replay.out + "/" + f));
  }
}

TEST_CASE("certificate recomputed from the log") {
  ScratchDir dir("certify");
  const std::string csv = write_synthetic(dir, oracle::SyntheticSpec{});
  ExperimentSpec spec = base_spec(csv);
  spec.out = dir / "run";
  const RunResult run = run_experiment(spec);
  write_run(run);

  const auto params = model::load_checkpoint(spec.out + "/checkpoint.json");
  const auto log = parse_training_log(read_text(spec.out + "/train_log.jsonl"));
  CHECK(log.rounds.size() == 50);
  CHECK(log.num_groups == 2);
  const PreparedData data = prepare_data(spec);
  const auto cert = certify_from_log(params, log, data.train, spec.certificate_metric);
  const std::string again = certify::to_json(cert).dump(2) + "\n";
  CHECK(again == read_text(spec.out + "/certificate.json"));

  model::ModelParams other = params;
  other.values()[0] += 1e-9;
  try {
    certify_from_log(other, log, data.train, spec.certificate_metric);
    FAIL("expected mismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kMismatch);
  }
  CHECK_THROWS_AS(parse_training_log("{\"round\": 1}\n"), Error);
  CHECK_THROWS_AS(parse_training_log("not json\n"), Error);
}

TEST_CASE("conditioning on a label absent from a group") {
  ScratchDir dir("event");
  // Group g1 has no positive labels.
  std::string csv = "f0,group,label\n";
  for (int i = 0; i < 40; ++i) csv += std::to_string(i / 40.0) + ",g0," + std::to_string(i % 2) + "\n";
  for (int i = 0; i < 40; ++i) csv += std::to_string(i / 40.0) + ",g1,0\n";
  write_text(dir / "data.csv", csv);
  ExperimentSpec spec = base_spec(dir / "data.csv");
  spec.certificate_metric = metrics::FairnessMetric::kEqualOpportunity;
  try {
    run_experiment(spec);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kEmptyEvent);
  }
}

TEST_CASE("baseline ignores the weight bound with a warning") {
  ScratchDir dir("dpsgd");
  const std::string csv = write_synthetic(dir, oracle::SyntheticSpec{});
  ExperimentSpec spec = base_spec(csv);
  spec.mechanism = Mechanism::kDpsgd;
  const RunResult with_m = run_experiment(spec);
  CHECK(with_m.warnings.size() == 1);
  CHECK(std::isinf(with_m.config.clip_m));
  spec.clip_m_set = false;
  spec.train.clip_m = 1.0;
  const RunResult without_m = run_experiment(spec);
  CHECK(without_m.warnings.empty());
  CHECK(with_m.params == without_m.params);
  REQUIRE(with_m.certificate.has_value());
  CHECK(with_m.certificate->tau_theoretical == 1.0);
  CHECK(with_m.certificate->num_groups == 1);
}

TEST_CASE("smoothed and functional mechanisms") {
  ScratchDir dir("mechanisms");
  oracle::SyntheticSpec data_spec;
  data_spec.dim = 2;
  const std::string csv = write_synthetic(dir, data_spec);
  ExperimentSpec spec = base_spec(csv);
  spec.mechanism = Mechanism::kDpsgdSmooth;
  spec.smooth_samples = 20;
  const RunResult smooth = run_experiment(spec);
  CHECK(smooth.test_eval.accuracy >= 0.0);
  CHECK(metrics_json(smooth) == metrics_json(run_experiment(spec)));

  spec.mechanism = Mechanism::kFairFM;
  spec.target_epsilon = 1e6;
  spec.fm_eta = 0.5;
  spec.train.steps = 300;
  const RunResult fm = run_experiment(spec);
  CHECK_FALSE(fm.certificate.has_value());
  CHECK(fm.rounds.empty());
  CHECK(fm.params.layer_dims() == std::vector<std::size_t>{2, 1});
  CHECK(fm.test_eval.accuracy > 0.6);

  spec.mechanism = Mechanism::kFairFMSmooth;
  CHECK_NOTHROW(run_experiment(spec));
}

TEST_CASE("sweeps") {
  ScratchDir dir("sweep");
  const std::string csv = write_synthetic(dir, oracle::SyntheticSpec{});
  ExperimentSpec spec = base_spec(csv);
  spec.train.steps = 20;

  const std::vector<double> eps{0.5, 1.0, 2.0, 4.0, 8.0};
  const auto rows = sweep(spec, SweepAxis::kEpsilon, eps);
  REQUIRE(rows.size() == 5);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].ok);
    if (i > 0) CHECK(rows[i].epsilon >= rows[i - 1].epsilon);
  }
  const std::string table = to_csv(rows, SweepAxis::kEpsilon);
  CHECK(std::count(table.begin(), table.end(), '\n') == 6);

  const auto m_rows = sweep(spec, SweepAxis::kClipM, {0.05, 0.2, 1.0, 5.0});
  for (std::size_t i = 1; i < m_rows.size(); ++i) {
    CHECK(*m_rows[i].tau_theoretical >= *m_rows[i - 1].tau_theoretical);
  }

  spec.out = dir / "rho";
  const auto rho_rows = sweep(spec, SweepAxis::kRho, {0.5, 1.0, 2.0});
  CHECK_FALSE(rho_rows[0].ok);
  CHECK(rho_rows[1].ok);
  CHECK(rho_rows[2].ok);
  CHECK(fs::exists(fs::path(spec.out) / "point-1" / "metrics.json"));
  CHECK(to_csv(rho_rows, SweepAxis::kRho).find("failed") != std::string::npos);
}

TEST_CASE("partition report") {
  ScratchDir dir("partition");
  oracle::SyntheticSpec data_spec;
  data_spec.group_sizes = {120, 40};
  ExperimentSpec spec = base_spec(write_synthetic(dir, data_spec));
  spec.rho = 1.0;
  const auto report = partition_report(spec);
  CHECK(report.full[0].size == 120);
  CHECK(report.full[1].size == 40);
  CHECK(report.train[0].size == report.train[1].size);
  CHECK(report.test[0].size + report.train[0].size < 120);
  CHECK(to_json(report)["full"].size() == 2);
}

// End-to-end through the command-line binary.
int run_cli(const std::string& args, const std::string& stderr_path = "/dev/null") {
  const std::string cmd = std::string(FAIRDP_CLI_PATH) + " " + args + " > /dev/null 2> " + stderr_path;
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST_CASE("command line") {
  ScratchDir dir("cli");
  const std::string csv = write_synthetic(dir, oracle::SyntheticSpec{});
  const std::string common = "--dataset " + csv +
                             " --protected group --label label --steps 40 --q 0.1 --hidden 8";
  CHECK(run_cli("train " + common + " --seed 5 --epsilon 2 --clip-m 0.7 --out " + (dir / "r1")) == 0);
  CHECK(fs::exists(dir / "r1/config.toml"));
  CHECK(run_cli("train --config " + (dir / "r1/config.toml") + " --out " + (dir / "r2")) == 0);
  for (const char* f : {"metrics.json", "certificate.json", "checkpoint.json"}) {
    CHECK(read_text(dir / ("r1/" + std::string(f))) == read_text(dir / ("r2/" + std::string(f))));
  }
  CHECK(run_cli("certify --config " + (dir / "r1/config.toml") + " --checkpoint " +
                (dir / "r1/checkpoint.json") + " --log " + (dir / "r1/train_log.jsonl") +
                " --out " + (dir / "c")) == 0);
  CHECK(read_text(dir / "c/certificate.json") == read_text(dir / "r1/certificate.json"));
  CHECK(run_cli("evaluate --config " + (dir / "r1/config.toml") + " --checkpoint " +
                (dir / "r1/checkpoint.json") + " --out " + (dir / "e")) == 0);
  CHECK(fs::exists(dir / "e/evaluation.json"));
  CHECK(run_cli("sweep " + common + " --seed 5 --axis epsilon --values 1 2 --out " + (dir / "s")) == 0);
  CHECK(fs::exists(dir / "s/sweep.csv"));
  CHECK(run_cli("partition-report " + common + " --seed 5") == 0);

  const std::string err = dir / "stderr.txt";
  CHECK(run_cli("train " + common + " --out " + (dir / "r3"), err) == 1);
  const auto j = nlohmann::json::parse(read_text(err));
  CHECK(j["error"]["kind"] == "invalid-parameter");
  CHECK(run_cli("train " + common + " --seed 1 --mechanism bogus --out " + (dir / "r4"), err) == 1);
  CHECK(run_cli("train --dataset /nonexistent.csv --protected g --label y --seed 1 --out " +
                    (dir / "r5"),
                err) == 1);
  CHECK(nlohmann::json::parse(read_text(err))["error"]["kind"] == "io");
  CHECK(run_cli("train " + common + " --seed 1 --mechanism dpsgd --clip-m 0.5 --out " + (dir / "r6"),
                err) == 0);
  CHECK(read_text(err).find("warning") != std::string::npos);
}

}  // namespace
}  // namespace fairdp::experiment
