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

// fairdp: train, certify, evaluate and sweep differentially private
// classifiers with group-fairness certificates.
//
//   fairdp train --dataset adult.csv --protected sex --label income
//       --epsilon 1 --clip-m 0.7 --seed 0 --out runs/adult
//   fairdp certify --config runs/adult/config.toml
//       --checkpoint runs/adult/checkpoint.json --log runs/adult/train_log.jsonl
//
// Every option may also come from a TOML/INI file given by --config; flags on
// the command line win. `train` stores the effective configuration (minus
// --out) as config.toml in the run directory.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include "CLI11.hpp"
#include "fairdp/error.h"
#include "fairdp/experiment.h"
#include "json.hpp"

namespace {

using fairdp::Error;
using fairdp::ErrorKind;
namespace ex = fairdp::experiment;

struct Options {
  std::string dataset;
  std::vector<std::string> protected_columns;
  std::string label;
  std::vector<std::string> features;
  std::string mechanism = "fairdp";
  std::optional<double> epsilon;
  double sigma = 1.0;
  double clip_c = 1.0;
  std::optional<double> clip_m;
  long steps = 100;
  double q = 0.01;
  double delta = 1e-5;
  std::optional<double> rho;
  std::string event = "dp";
  std::optional<std::uint64_t> seed;
  std::string out;

  double eta_adam = 0.02;
  double eta_sgd = 0.005;
  double switch_fraction = 0.9;
  std::vector<std::size_t> hidden{32};
  double threshold = 0.5;
  double test_fraction = 0.2;
  std::vector<std::string> metrics{"dp", "eo", "odds"};
  double smooth_sigma = 0.01;
  std::size_t smooth_samples = 50;
  double fm_eta = 0.05;

  // certify / evaluate
  std::string checkpoint;
  std::string log;
  // sweep
  std::string axis = "epsilon";
  std::vector<double> values;
};

ex::ExperimentSpec to_spec(const Options& o) {
  if (!o.seed) throw Error(ErrorKind::kInvalidParameter, "--seed is required");
  ex::ExperimentSpec spec;
  spec.dataset = o.dataset;
  spec.schema.protected_columns = o.protected_columns;
  spec.schema.label_column = o.label;
  spec.schema.feature_columns = o.features;
  spec.mechanism = ex::ParseMechanism(o.mechanism);
  auto& t = spec.train;
  t.seed = *o.seed;
  t.q = o.q;
  t.sigma = o.sigma;
  t.clip_c = o.clip_c;
  if (o.clip_m) {
    t.clip_m = *o.clip_m;
    spec.clip_m_set = true;
  }
  t.steps = o.steps;
  t.delta = o.delta;
  t.eta_adam = o.eta_adam;
  t.eta_sgd = o.eta_sgd;
  t.switch_fraction = o.switch_fraction;
  t.hidden_dims = o.hidden;
  t.threshold = o.threshold;
  spec.target_epsilon = o.epsilon;
  spec.rho = o.rho;
  spec.test_fraction = o.test_fraction;
  spec.certificate_metric = fairdp::metrics::ParseFairnessMetric(o.event);
  spec.metrics.clear();
  for (const auto& m : o.metrics) spec.metrics.push_back(fairdp::metrics::ParseFairnessMetric(m));
  spec.smooth_sigma = o.smooth_sigma;
  spec.smooth_samples = o.smooth_samples;
  spec.fm_eta = o.fm_eta;
  spec.out = o.out;
  spec.validate();
  return spec;
}

// Shortest text that reads back as the same double.
std::string toml_value(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string toml_value(const std::string& v) { return nlohmann::json(v).dump(); }

template <typename T>
std::string toml_value(const std::vector<T>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out += ", ";
    if constexpr (std::is_same_v<T, std::string> || std::is_floating_point_v<T>) {
      out += toml_value(v[i]);
    } else {
      out += std::to_string(v[i]);
    }
  }
  return out + "]";
}

// The effective configuration of a run without the output directory, so the
// run can be replayed into a fresh directory with --config.
std::string persisted_config(const Options& o) {
  std::string out;
  auto put = [&](const char* key, const std::string& value) {
    out += std::string(key) + " = " + value + "\n";
  };
  put("dataset", toml_value(o.dataset));
  put("protected", toml_value(o.protected_columns));
  put("label", toml_value(o.label));
  if (!o.features.empty()) put("features", toml_value(o.features));
  put("mechanism", toml_value(o.mechanism));
  if (o.epsilon) put("epsilon", toml_value(*o.epsilon));
  put("sigma", toml_value(o.sigma));
  put("clip-c", toml_value(o.clip_c));
  if (o.clip_m) put("clip-m", toml_value(*o.clip_m));
  put("steps", std::to_string(o.steps));
  put("q", toml_value(o.q));
  put("delta", toml_value(o.delta));
  if (o.rho) put("rho", toml_value(*o.rho));
  put("event", toml_value(o.event));
  put("seed", std::to_string(*o.seed));
  put("eta-adam", toml_value(o.eta_adam));
  put("eta-sgd", toml_value(o.eta_sgd));
  put("switch-fraction", toml_value(o.switch_fraction));
  put("hidden", toml_value(o.hidden));
  put("threshold", toml_value(o.threshold));
  put("test-fraction", toml_value(o.test_fraction));
  put("metrics", toml_value(o.metrics));
  put("smooth-sigma", toml_value(o.smooth_sigma));
  put("smooth-samples", std::to_string(o.smooth_samples));
  put("fm-eta", toml_value(o.fm_eta));
  return out;
}

void emit(const nlohmann::json& j) { std::cout << j.dump(2) << '\n'; }

void warn(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

int cmd_train(const Options& o) {
  ex::ExperimentSpec spec = to_spec(o);
  if (spec.out.empty()) throw Error(ErrorKind::kInvalidParameter, "train: --out is required");
  const ex::RunResult run = ex::run_experiment(spec);
  warn(run.warnings);
  ex::write_run(run);
  ex::write_text((std::filesystem::path(spec.out) / "config.toml").string(), persisted_config(o));
  nlohmann::json summary = {{"out", spec.out},
                            {"epsilon", run.epsilon},
                            {"accuracy", run.test_eval.accuracy}};
  if (run.certificate) {
    summary["tau_theoretical"] = run.certificate->tau_theoretical;
    summary["tau_empirical"] = run.certificate->tau_empirical;
  }
  emit(summary);
  return 0;
}

int cmd_certify(const Options& o) {
  const ex::ExperimentSpec spec = to_spec(o);
  if (o.checkpoint.empty() || o.log.empty()) {
    throw Error(ErrorKind::kInvalidParameter, "certify: --checkpoint and --log are required");
  }
  const auto params = fairdp::model::load_checkpoint(o.checkpoint);
  const auto log = ex::parse_training_log(ex::read_text(o.log));
  const ex::PreparedData data = ex::prepare_data(spec);
  const auto cert = ex::certify_from_log(params, log, data.train, spec.certificate_metric);
  const nlohmann::json j = fairdp::certify::to_json(cert);
  if (!spec.out.empty()) {
    std::filesystem::create_directories(spec.out);
    ex::write_json((std::filesystem::path(spec.out) / "certificate.json").string(), j);
  }
  emit(j);
  return 0;
}

int cmd_evaluate(const Options& o) {
  const ex::ExperimentSpec spec = to_spec(o);
  if (o.checkpoint.empty()) throw Error(ErrorKind::kInvalidParameter, "evaluate: --checkpoint is required");
  const auto params = fairdp::model::load_checkpoint(o.checkpoint);
  const ex::RunResult run = ex::evaluate_checkpoint(spec, params, ex::prepare_data(spec));
  nlohmann::json j = ex::metrics_json(run);
  j.erase("epsilon");
  j.erase("delta");
  j.erase("sigma");
  if (!spec.out.empty()) {
    std::filesystem::create_directories(spec.out);
    ex::write_json((std::filesystem::path(spec.out) / "evaluation.json").string(), j);
    ex::write_text((std::filesystem::path(spec.out) / "evaluation.csv").string(),
                   fairdp::metrics::to_csv(run.test_eval));
  }
  emit(j);
  return 0;
}

int cmd_sweep(const Options& o) {
  const ex::ExperimentSpec spec = to_spec(o);
  const ex::SweepAxis axis = ex::ParseSweepAxis(o.axis);
  const auto rows = ex::sweep(spec, axis, o.values);
  const std::string csv = ex::to_csv(rows, axis);
  if (!spec.out.empty()) {
    std::filesystem::create_directories(spec.out);
    ex::write_json((std::filesystem::path(spec.out) / "sweep.json").string(), ex::to_json(rows, axis));
    ex::write_text((std::filesystem::path(spec.out) / "sweep.csv").string(), csv);
  }
  std::cout << csv;
  for (const auto& r : rows) {
    if (!r.ok) std::cerr << "warning: point " << r.value << " failed: " << r.error << '\n';
  }
  return 0;
}

int cmd_partition_report(const Options& o) {
  const ex::ExperimentSpec spec = to_spec(o);
  const ex::PartitionReport report = ex::partition_report(spec);
  if (!spec.out.empty()) {
    std::filesystem::create_directories(spec.out);
    ex::write_json((std::filesystem::path(spec.out) / "partition.json").string(), ex::to_json(report));
    ex::write_text((std::filesystem::path(spec.out) / "partition.csv").string(), ex::to_csv(report));
  }
  emit(ex::to_json(report));
  return 0;
}

void report_error(std::string_view kind, const std::string& message) {
  const nlohmann::json j = {{"error", {{"kind", kind}, {"message", message}}}};
  std::cerr << j.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private training with group-fairness certificates", "fairdp"};
  app.set_config("--config", "", "TOML/INI file with option values; flags override it");
  app.require_subcommand(1);
  Options o;

  app.add_option("--dataset", o.dataset, "CSV file with a header row");
  app.add_option("--protected", o.protected_columns,
                 "Protected column(s); several are combined by cross product");
  app.add_option("--label", o.label, "Binary label column (values 0/1)");
  app.add_option("--features", o.features, "Feature columns (default: all others)");
  app.add_option("--mechanism", o.mechanism, "fairdp, dpsgd, dpsgd-smooth, fairfm, fairfm-smooth")
      ->capture_default_str();
  app.add_option("--epsilon", o.epsilon, "Target epsilon; calibrates sigma for SGD mechanisms");
  app.add_option("--sigma", o.sigma, "Noise multiplier when --epsilon is absent")->capture_default_str();
  app.add_option("--clip-c", o.clip_c, "Per-example gradient clipping bound C")->capture_default_str();
  app.add_option("--clip-m", o.clip_m, "Output-layer weight bound M (fairdp only)");
  app.add_option("--steps", o.steps, "Training rounds T")->capture_default_str();
  app.add_option("--q", o.q, "Poisson sampling rate")->capture_default_str();
  app.add_option("--delta", o.delta, "Privacy delta")->capture_default_str();
  app.add_option("--rho", o.rho, "Majority-to-minority group size ratio for subsampling");
  app.add_option("--event", o.event, "Certificate metric: dp|none, eo|positive-label, odds")
      ->capture_default_str();
  app.add_option("--seed", o.seed, "Seed for every random stream (required)");
  app.add_option("--out", o.out, "Output directory");
  app.add_option("--eta-adam", o.eta_adam, "Adam learning rate")->capture_default_str();
  app.add_option("--eta-sgd", o.eta_sgd, "SGD learning rate")->capture_default_str();
  app.add_option("--switch-fraction", o.switch_fraction, "Fraction of rounds run with Adam")
      ->capture_default_str();
  app.add_option("--hidden", o.hidden, "Hidden layer widths")->capture_default_str();
  app.add_option("--threshold", o.threshold, "Decision threshold")->capture_default_str();
  app.add_option("--test-fraction", o.test_fraction, "Held-out fraction per (group, label)")
      ->capture_default_str();
  app.add_option("--metrics", o.metrics, "Fairness metrics to report")->capture_default_str();
  app.add_option("--smooth-sigma", o.smooth_sigma, "Parameter noise for smooth inference")
      ->capture_default_str();
  app.add_option("--smooth-samples", o.smooth_samples, "Samples for smooth inference")
      ->capture_default_str();
  app.add_option("--fm-eta", o.fm_eta, "FairFM learning rate")->capture_default_str();

  auto* train = app.add_subcommand("train", "Train, certify and evaluate one configuration");
  auto* certify = app.add_subcommand("certify", "Recompute the certificate of a finished run");
  certify->add_option("--checkpoint", o.checkpoint, "checkpoint.json of the run");
  certify->add_option("--log", o.log, "train_log.jsonl of the run");
  auto* evaluate = app.add_subcommand("evaluate", "Evaluate a checkpoint on the held-out split");
  evaluate->add_option("--checkpoint", o.checkpoint, "checkpoint.json to evaluate");
  auto* sweep = app.add_subcommand("sweep", "Run a grid over one axis");
  sweep->add_option("--axis", o.axis, "epsilon, rho or clip-m")->capture_default_str();
  sweep->add_option("--values", o.values, "Grid values")->required();
  auto* partition = app.add_subcommand("partition-report", "Group sizes and base rates");
  for (auto* sub : {train, certify, evaluate, sweep, partition}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*train) return cmd_train(o);
    if (*certify) return cmd_certify(o);
    if (*evaluate) return cmd_evaluate(o);
    if (*sweep) return cmd_sweep(o);
    if (*partition) return cmd_partition_report(o);
  } catch (const Error& e) {
    report_error(fairdp::ErrorKindName(e.kind()), e.what());
    return 1;
  } catch (const std::exception& e) {
    report_error("internal", e.what());
    return 1;
  }
  return 1;
}
