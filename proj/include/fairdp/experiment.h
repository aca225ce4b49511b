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

// Experiment orchestration shared by the command-line tool: data
// preparation, mechanism dispatch, evaluation, certification, sweeps and the
// run-directory layout.
//
// A run directory holds
//   spec.json         the effective ExperimentSpec
//   checkpoint.json   final model parameters
//   train_log.jsonl   one line per round, then a closing summary line
//   privacy.json      accountant state
//   certificate.json  fairness certificate (Algorithm-1 mechanisms only)
//   metrics.json      held-out and training-set metrics
//   metrics.csv       per-group outcome table on the held-out split

#ifndef FAIRDP_EXPERIMENT_H_
#define FAIRDP_EXPERIMENT_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fairdp/certify.h"
#include "fairdp/data.h"
#include "fairdp/metrics.h"
#include "fairdp/model.h"
#include "fairdp/trainer.h"
#include "json.hpp"

namespace fairdp::experiment {

enum class Mechanism { kFairDP, kDpsgd, kDpsgdSmooth, kFairFM, kFairFMSmooth };

std::string MechanismName(Mechanism m);
Mechanism ParseMechanism(const std::string& name);

// True for mechanisms trained with the group-partitioned DP-SGD loop.
bool IsSgdMechanism(Mechanism m);
bool IsSmoothMechanism(Mechanism m);

enum StreamSite : std::uint64_t {
  kSplitSite = 10,
  kSubsampleSite = 11,
  kSmoothSite = 12,
};

struct ExperimentSpec {
  std::string dataset;
  data::CsvSchema schema;
  Mechanism mechanism = Mechanism::kFairDP;
  // Seed lives in train.seed. train.clip_m is only honoured for fairdp.
  training::TrainConfig train;
  bool clip_m_set = false;
  // When present, sigma is calibrated so the run spends this budget.
  std::optional<double> target_epsilon;
  std::optional<double> rho;
  double test_fraction = 0.2;
  // Conditioning event of the certificate: a metric name ("dp", "eo", "odds").
  metrics::FairnessMetric certificate_metric = metrics::FairnessMetric::kDemographicParity;
  std::vector<metrics::FairnessMetric> metrics{metrics::FairnessMetric::kDemographicParity,
                                               metrics::FairnessMetric::kEqualOpportunity,
                                               metrics::FairnessMetric::kEqualOdds};
  // Smooth inference.
  double smooth_sigma = 0.01;
  std::size_t smooth_samples = 50;
  // FairFM.
  double fm_eta = 0.05;
  std::string out;

  // Throws kInvalidParameter on missing or inconsistent fields.
  void validate() const;
};

nlohmann::json to_json(const ExperimentSpec& spec);
ExperimentSpec spec_from_json(const nlohmann::json& j);

struct PreparedData {
  data::TabularDataset train;
  data::TabularDataset test;
  data::GroupPartition train_part;
  data::GroupPartition test_part;
};

// Load, split (stratified by group and label) and optionally rebalance the
// training split. Deterministic in the spec.
PreparedData prepare_data(const ExperimentSpec& spec);
PreparedData prepare_data(const data::TabularDataset& full, const ExperimentSpec& spec);

// The TrainConfig actually used: calibrated sigma, M = inf for dpsgd.
training::TrainConfig effective_config(const ExperimentSpec& spec);

struct GapSet {
  std::optional<double> demographic_parity;
  std::optional<double> equal_opportunity;
  std::optional<double> equal_odds;

  std::optional<double> get(metrics::FairnessMetric metric) const;
};

GapSet all_gaps(const metrics::GroupOutcomeTable& table);

struct RunResult {
  ExperimentSpec spec;
  training::TrainConfig config;
  model::ModelParams params;
  // Empty for FairFM.
  std::vector<training::RoundRecord> rounds;
  double epsilon = 0.0;
  double delta = 0.0;
  nlohmann::json privacy;
  metrics::Evaluation test_eval;
  metrics::Evaluation train_eval;
  GapSet test_gaps;
  GapSet train_gaps;
  std::optional<certify::FairnessCertificate> certificate;
  std::vector<std::string> warnings;
};

RunResult run_experiment(const ExperimentSpec& spec);
RunResult run_experiment(const ExperimentSpec& spec, const PreparedData& data);

// Re-evaluates saved parameters on the prepared splits; fills only the
// evaluation fields of the result.
RunResult evaluate_checkpoint(const ExperimentSpec& spec, const model::ModelParams& params,
                              const PreparedData& data);

nlohmann::json metrics_json(const RunResult& run);

// Writes every artifact of the run directory to spec.out.
void write_run(const RunResult& run);

// FNV-1a over the IEEE-754 bytes of the parameters, as 16 hex digits.
std::string params_digest(const model::ModelParams& params);

// JSONL training log: one object per round and a closing summary object.
std::string training_log(const RunResult& run);

struct TrainingLog {
  std::vector<training::RoundRecord> rounds;
  training::TrainConfig config;
  int num_groups = 0;
  std::string params_digest;
};

TrainingLog parse_training_log(const std::string& text);

// Recomputes the certificate of a finished run from its checkpoint and log.
// Throws kMismatch when the log does not belong to the checkpoint.
certify::FairnessCertificate certify_from_log(const model::ModelParams& params,
                                              const TrainingLog& log,
                                              const data::TabularDataset& train,
                                              metrics::FairnessMetric metric);

enum class SweepAxis { kEpsilon, kRho, kClipM };

std::string SweepAxisName(SweepAxis axis);
SweepAxis ParseSweepAxis(const std::string& name);

struct SweepRow {
  double value = 0.0;
  bool ok = false;
  std::string error;
  double epsilon = 0.0;
  double accuracy = 0.0;
  std::optional<double> precision;
  GapSet gaps;
  std::optional<double> tau_theoretical;
  std::optional<double> tau_empirical;
};

// One run per grid point; failures are recorded in the row and the sweep
// carries on. When spec.out is set each point writes its own run directory.
std::vector<SweepRow> sweep(const ExperimentSpec& spec, SweepAxis axis,
                            const std::vector<double>& values);

nlohmann::json to_json(const std::vector<SweepRow>& rows, SweepAxis axis);
std::string to_csv(const std::vector<SweepRow>& rows, SweepAxis axis);

struct GroupSummary {
  std::string name;
  std::size_t size = 0;
  std::size_t positives = 0;
};

struct PartitionReport {
  std::vector<GroupSummary> full;
  std::vector<GroupSummary> train;
  std::vector<GroupSummary> test;
};

PartitionReport partition_report(const ExperimentSpec& spec);
nlohmann::json to_json(const PartitionReport& report);
std::string to_csv(const PartitionReport& report);

// Serialises through nlohmann::json with a trailing newline.
void write_json(const std::string& path, const nlohmann::json& j);
void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace fairdp::experiment

#endif  // FAIRDP_EXPERIMENT_H_
