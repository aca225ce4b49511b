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

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <utility>

#include "fairdp/error.h"
#include "fairdp/fairfm.h"
#include "fairdp/privacy.h"

namespace fairdp::experiment {
namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// JSON has no infinity; +inf round-trips through the string "inf".
json number_json(double v) { return std::isfinite(v) ? json(v) : json("inf"); }

double number_from_json(const json& j) {
  if (j.is_string() && j.get<std::string>() == "inf") return kInf;
  return j.get<double>();
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  return it->get<T>();
}

std::string csv_number(const std::optional<double>& v) {
  if (!v) return "";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", *v);
  return buf;
}

std::string csv_number(double v) { return csv_number(std::optional<double>(v)); }

std::vector<double> probabilities_for(const RunResult& run, const model::ModelParams& params,
                                      const data::TabularDataset& ds, const char* which) {
  if (!IsSmoothMechanism(run.spec.mechanism)) return metrics::predict_probabilities(params, ds);
  // Independent but fixed smoothing draws for each split.
  const std::uint64_t index = std::strcmp(which, "test") == 0 ? 0 : 1;
  linalg::RngStream rng(run.spec.train.seed, (static_cast<std::uint64_t>(kSmoothSite) << 32) | index);
  certify::SmoothedClassifier smooth(params, run.spec.smooth_sigma, run.spec.smooth_samples, rng);
  return smooth.probabilities(ds);
}

std::vector<GroupSummary> summarize(const data::TabularDataset& ds) {
  std::vector<GroupSummary> out(static_cast<std::size_t>(ds.num_groups));
  for (int k = 0; k < ds.num_groups; ++k) out[k].name = ds.group_names[k];
  for (std::size_t i = 0; i < ds.size(); ++i) {
    auto& g = out[static_cast<std::size_t>(ds.group[i])];
    ++g.size;
    g.positives += ds.labels[i] == 1 ? 1 : 0;
  }
  return out;
}

json summaries_json(const std::vector<GroupSummary>& groups) {
  json arr = json::array();
  for (std::size_t k = 0; k < groups.size(); ++k) {
    const auto& g = groups[k];
    arr.push_back({{"group", k},
                   {"name", g.name},
                   {"size", g.size},
                   {"positives", g.positives},
                   {"base_rate", g.size > 0 ? json(static_cast<double>(g.positives) /
                                                   static_cast<double>(g.size))
                                            : json(nullptr)}});
  }
  return arr;
}

}  // namespace

std::string MechanismName(Mechanism m) {
  switch (m) {
    case Mechanism::kFairDP:
      return "fairdp";
    case Mechanism::kDpsgd:
      return "dpsgd";
    case Mechanism::kDpsgdSmooth:
      return "dpsgd-smooth";
    case Mechanism::kFairFM:
      return "fairfm";
    case Mechanism::kFairFMSmooth:
      return "fairfm-smooth";
  }
  return "unknown";
}

Mechanism ParseMechanism(const std::string& name) {
  for (Mechanism m : {Mechanism::kFairDP, Mechanism::kDpsgd, Mechanism::kDpsgdSmooth,
                      Mechanism::kFairFM, Mechanism::kFairFMSmooth}) {
    if (MechanismName(m) == name) return m;
  }
  throw Error(ErrorKind::kInvalidParameter, "unknown mechanism '" + name + "'");
}

bool IsSgdMechanism(Mechanism m) {
  return m == Mechanism::kFairDP || m == Mechanism::kDpsgd || m == Mechanism::kDpsgdSmooth;
}

bool IsSmoothMechanism(Mechanism m) {
  return m == Mechanism::kDpsgdSmooth || m == Mechanism::kFairFMSmooth;
}

void ExperimentSpec::validate() const {
  if (dataset.empty()) throw Error(ErrorKind::kInvalidParameter, "spec: dataset path is required");
  if (schema.label_column.empty()) {
    throw Error(ErrorKind::kInvalidParameter, "spec: label column is required");
  }
  if (schema.protected_columns.empty()) {
    throw Error(ErrorKind::kInvalidParameter, "spec: at least one protected column is required");
  }
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error(ErrorKind::kInvalidParameter, "spec: test fraction must lie in (0, 1)");
  }
  if (rho && !(*rho >= 1.0)) throw Error(ErrorKind::kInvalidParameter, "spec: rho must be >= 1");
  if (target_epsilon && !(*target_epsilon > 0.0 && std::isfinite(*target_epsilon))) {
    throw Error(ErrorKind::kInvalidParameter, "spec: epsilon must be finite and > 0");
  }
  if (mechanism == Mechanism::kFairFM || mechanism == Mechanism::kFairFMSmooth) {
    if (!target_epsilon) {
      throw Error(ErrorKind::kInvalidParameter, "spec: " + MechanismName(mechanism) +
                                                    " requires an epsilon");
    }
    if (!(fm_eta > 0.0)) throw Error(ErrorKind::kInvalidParameter, "spec: fm_eta must be > 0");
    if (train.steps < 1) throw Error(ErrorKind::kInvalidParameter, "spec: steps must be >= 1");
  }
  if (IsSmoothMechanism(mechanism)) {
    if (!(smooth_sigma > 0.0)) {
      throw Error(ErrorKind::kInvalidParameter, "spec: smoothing sigma must be > 0");
    }
    if (smooth_samples < 1) {
      throw Error(ErrorKind::kInvalidParameter, "spec: smoothing needs at least one sample");
    }
  }
  if (IsSgdMechanism(mechanism)) {
    // Sigma is about to be replaced by calibration, so check the rest only.
    training::TrainConfig probe = train;
    if (target_epsilon) probe.sigma = 1.0;
    probe.validate();
  }
}

json to_json(const ExperimentSpec& spec) {
  std::vector<std::string> metric_names;
  for (auto m : spec.metrics) metric_names.push_back(metrics::FairnessMetricName(m));
  const auto& t = spec.train;
  return {{"dataset", spec.dataset},
          {"schema",
           {{"features", spec.schema.feature_columns},
            {"protected", spec.schema.protected_columns},
            {"label", spec.schema.label_column}}},
          {"mechanism", MechanismName(spec.mechanism)},
          {"seed", t.seed},
          {"q", t.q},
          {"sigma", t.sigma},
          {"clip_c", t.clip_c},
          {"clip_m", spec.clip_m_set ? number_json(t.clip_m) : json(nullptr)},
          {"steps", t.steps},
          {"delta", t.delta},
          {"eta_adam", t.eta_adam},
          {"eta_sgd", t.eta_sgd},
          {"switch_fraction", t.switch_fraction},
          {"hidden_dims", t.hidden_dims},
          {"threshold", t.threshold},
          {"epsilon", optional_json(spec.target_epsilon)},
          {"rho", optional_json(spec.rho)},
          {"test_fraction", spec.test_fraction},
          {"certificate_metric", metrics::FairnessMetricName(spec.certificate_metric)},
          {"metrics", metric_names},
          {"smooth_sigma", spec.smooth_sigma},
          {"smooth_samples", spec.smooth_samples},
          {"fm_eta", spec.fm_eta},
          {"out", spec.out}};
}

ExperimentSpec spec_from_json(const json& j) {
  try {
    ExperimentSpec spec;
    spec.dataset = j.at("dataset").get<std::string>();
    const json& s = j.at("schema");
    spec.schema.feature_columns = get_or<std::vector<std::string>>(s, "features", {});
    spec.schema.protected_columns = s.at("protected").get<std::vector<std::string>>();
    spec.schema.label_column = s.at("label").get<std::string>();
    spec.mechanism = ParseMechanism(j.at("mechanism").get<std::string>());
    auto& t = spec.train;
    t.seed = j.at("seed").get<std::uint64_t>();
    t.q = get_or(j, "q", t.q);
    t.sigma = get_or(j, "sigma", t.sigma);
    t.clip_c = get_or(j, "clip_c", t.clip_c);
    if (j.contains("clip_m") && !j["clip_m"].is_null()) {
      t.clip_m = number_from_json(j["clip_m"]);
      spec.clip_m_set = true;
    }
    t.steps = get_or(j, "steps", t.steps);
    t.delta = get_or(j, "delta", t.delta);
    t.eta_adam = get_or(j, "eta_adam", t.eta_adam);
    t.eta_sgd = get_or(j, "eta_sgd", t.eta_sgd);
    t.switch_fraction = get_or(j, "switch_fraction", t.switch_fraction);
    t.hidden_dims = get_or(j, "hidden_dims", t.hidden_dims);
    t.threshold = get_or(j, "threshold", t.threshold);
    if (j.contains("epsilon") && !j["epsilon"].is_null()) spec.target_epsilon = j["epsilon"].get<double>();
    if (j.contains("rho") && !j["rho"].is_null()) spec.rho = j["rho"].get<double>();
    spec.test_fraction = get_or(j, "test_fraction", spec.test_fraction);
    if (j.contains("certificate_metric")) {
      spec.certificate_metric =
          metrics::ParseFairnessMetric(j["certificate_metric"].get<std::string>());
    }
    if (j.contains("metrics")) {
      spec.metrics.clear();
      for (const auto& m : j["metrics"]) {
        spec.metrics.push_back(metrics::ParseFairnessMetric(m.get<std::string>()));
      }
    }
    spec.smooth_sigma = get_or(j, "smooth_sigma", spec.smooth_sigma);
    spec.smooth_samples = get_or(j, "smooth_samples", spec.smooth_samples);
    spec.fm_eta = get_or(j, "fm_eta", spec.fm_eta);
    spec.out = get_or<std::string>(j, "out", "");
    return spec;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kFormat, std::string("spec: ") + e.what());
  }
}

PreparedData prepare_data(const ExperimentSpec& spec) {
  return prepare_data(data::load_csv(spec.dataset, spec.schema), spec);
}

PreparedData prepare_data(const data::TabularDataset& full, const ExperimentSpec& spec) {
  linalg::RngStream split_rng(spec.train.seed, static_cast<std::uint64_t>(kSplitSite) << 32);
  data::TrainTestSplit split = data::stratified_split(full, spec.test_fraction, split_rng);
  PreparedData out;
  if (spec.rho) {
    linalg::RngStream sub_rng(spec.train.seed, static_cast<std::uint64_t>(kSubsampleSite) << 32);
    out.train = data::subsample_major(split.train, *spec.rho, sub_rng);
  } else {
    out.train = std::move(split.train);
  }
  out.test = std::move(split.test);
  out.train_part = data::partition_by_group(out.train);
  out.test_part = data::partition_by_group(out.test);
  return out;
}

training::TrainConfig effective_config(const ExperimentSpec& spec) {
  training::TrainConfig cfg = spec.train;
  if (spec.mechanism != Mechanism::kFairDP) cfg.clip_m = kInf;
  if (IsSgdMechanism(spec.mechanism) && spec.target_epsilon) {
    cfg.sigma = privacy::calibrate_sigma(*spec.target_epsilon, cfg.q, cfg.steps, cfg.delta);
  }
  return cfg;
}

std::optional<double> GapSet::get(metrics::FairnessMetric metric) const {
  switch (metric) {
    case metrics::FairnessMetric::kDemographicParity:
      return demographic_parity;
    case metrics::FairnessMetric::kEqualOpportunity:
      return equal_opportunity;
    case metrics::FairnessMetric::kEqualOdds:
      return equal_odds;
  }
  return std::nullopt;
}

GapSet all_gaps(const metrics::GroupOutcomeTable& table) {
  GapSet g;
  g.demographic_parity = metrics::fairness_gap(table, metrics::FairnessMetric::kDemographicParity);
  g.equal_opportunity = metrics::fairness_gap(table, metrics::FairnessMetric::kEqualOpportunity);
  g.equal_odds = metrics::fairness_gap(table, metrics::FairnessMetric::kEqualOdds);
  return g;
}

namespace {

void evaluate_run(RunResult& run, const PreparedData& data) {
  const auto test_probs = probabilities_for(run, run.params, data.test, "test");
  const auto train_probs = probabilities_for(run, run.params, data.train, "train");
  run.test_eval = metrics::evaluate(test_probs, data.test, data.test_part, run.config.threshold);
  run.train_eval =
      metrics::evaluate(train_probs, data.train, data.train_part, run.config.threshold);
  run.test_gaps = all_gaps(run.test_eval.table);
  run.train_gaps = all_gaps(run.train_eval.table);
}

}  // namespace

RunResult run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  return run_experiment(spec, prepare_data(spec));
}

RunResult run_experiment(const ExperimentSpec& spec, const PreparedData& data) {
  spec.validate();
  RunResult run;
  run.spec = spec;
  run.config = effective_config(spec);
  run.delta = run.config.delta;

  if (spec.clip_m_set && spec.mechanism != Mechanism::kFairDP) {
    run.warnings.push_back(MechanismName(spec.mechanism) +
                           " does not clip the output layer; clip_m is ignored");
  }

  if (IsSgdMechanism(spec.mechanism)) {
    training::TrainResult tr = spec.mechanism == Mechanism::kFairDP
                                   ? training::train(data.train, data.train_part, run.config)
                                   : training::train_dpsgd_baseline(data.train, run.config);
    run.params = std::move(tr.params);
    run.epsilon = tr.epsilon;
    run.privacy = privacy::to_json(tr.ledger);
    run.privacy["mechanism"] = "subsampled-gaussian";
    run.privacy["num_groups"] = tr.num_groups;
    run.privacy["composition"] = "parallel";
    bool has_sgd = false;
    for (const auto& r : tr.rounds) has_sgd = has_sgd || r.mode == model::OptimizerMode::kSgd;
    if (has_sgd) {
      const certify::CertContext ctx = certify::last_sgd_context(tr, run.config);
      run.certificate =
          certify::certify(ctx, data.train, data.train_part, spec.certificate_metric, run.params);
    } else {
      run.warnings.push_back("no SGD rounds; certificate skipped");
    }
    run.rounds = std::move(tr.rounds);
  } else {
    run.params = fm::train_fairfm(data.train, data.train_part, *spec.target_epsilon, spec.fm_eta,
                                  spec.train.steps, spec.train.seed);
    run.epsilon = *spec.target_epsilon;
    run.delta = 0.0;
    run.privacy = {{"mechanism", "functional-laplace"},
                   {"epsilon", run.epsilon},
                   {"delta", 0.0},
                   {"num_groups", data.train_part.num_groups()},
                   {"sensitivity", fm::sensitivity(data.train.dim())},
                   {"composition", "parallel"}};
  }

  evaluate_run(run, data);
  return run;
}

RunResult evaluate_checkpoint(const ExperimentSpec& spec, const model::ModelParams& params,
                              const PreparedData& data) {
  if (params.input_dim() != data.test.dim()) {
    throw Error(ErrorKind::kMismatch, "evaluate: checkpoint input dimension " +
                                          std::to_string(params.input_dim()) +
                                          " does not match the dataset's " +
                                          std::to_string(data.test.dim()));
  }
  RunResult run;
  run.spec = spec;
  run.config = spec.train;
  run.params = params;
  evaluate_run(run, data);
  return run;
}

json metrics_json(const RunResult& run) {
  auto gaps = [&](const GapSet& g) {
    json out = json::object();
    for (auto m : run.spec.metrics) out[metrics::FairnessMetricName(m)] = optional_json(g.get(m));
    return out;
  };
  json test = metrics::to_json(run.test_eval);
  test["gaps"] = gaps(run.test_gaps);
  return {{"mechanism", MechanismName(run.spec.mechanism)},
          {"epsilon", number_json(run.epsilon)},
          {"delta", run.delta},
          {"sigma", IsSgdMechanism(run.spec.mechanism) ? json(run.config.sigma) : json(nullptr)},
          {"test", test},
          {"train",
           {{"accuracy", run.train_eval.accuracy},
            {"precision", optional_json(run.train_eval.precision)},
            {"gaps", gaps(run.train_gaps)}}}};
}

std::string params_digest(const model::ModelParams& params) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double v : params.values()) {
    unsigned char bytes[sizeof(double)];
    std::memcpy(bytes, &v, sizeof(double));
    for (unsigned char b : bytes) {
      h ^= b;
      h *= 0x100000001b3ULL;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

std::string training_log(const RunResult& run) {
  std::string out;
  for (const auto& r : run.rounds) {
    json line = {{"round", r.round},
                 {"mode", model::OptimizerModeName(r.mode)},
                 {"learning_rate", r.learning_rate},
                 {"batch_total", r.batch_total},
                 {"batch_sizes", r.batch_sizes},
                 {"loss", r.loss},
                 {"w_prev", r.w_prev},
                 {"mu", r.mu}};
    out += line.dump();
    out += '\n';
  }
  const auto& c = run.config;
  json summary = {{"summary", true},
                  {"mechanism", MechanismName(run.spec.mechanism)},
                  {"num_groups", IsSgdMechanism(run.spec.mechanism) &&
                                         run.spec.mechanism != Mechanism::kFairDP
                                     ? 1
                                     : static_cast<int>(run.train_eval.table.groups.size())},
                  {"q", c.q},
                  {"sigma", c.sigma},
                  {"clip_c", c.clip_c},
                  {"clip_m", number_json(c.clip_m)},
                  {"steps", c.steps},
                  {"delta", c.delta},
                  {"eta_adam", c.eta_adam},
                  {"eta_sgd", c.eta_sgd},
                  {"switch_fraction", c.switch_fraction},
                  {"threshold", c.threshold},
                  {"epsilon", number_json(run.epsilon)},
                  {"params_digest", params_digest(run.params)}};
  out += summary.dump();
  out += '\n';
  return out;
}

TrainingLog parse_training_log(const std::string& text) {
  TrainingLog log;
  std::istringstream in(text);
  std::string line;
  bool have_summary = false;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (have_summary) throw Error(ErrorKind::kFormat, "training log: content after summary line");
    json j;
    try {
      j = json::parse(line);
      if (j.value("summary", false)) {
        have_summary = true;
        auto& c = log.config;
        log.num_groups = j.at("num_groups").get<int>();
        c.q = j.at("q").get<double>();
        c.sigma = j.at("sigma").get<double>();
        c.clip_c = j.at("clip_c").get<double>();
        c.clip_m = number_from_json(j.at("clip_m"));
        c.steps = j.at("steps").get<long>();
        c.delta = j.at("delta").get<double>();
        c.eta_adam = j.at("eta_adam").get<double>();
        c.eta_sgd = j.at("eta_sgd").get<double>();
        c.switch_fraction = j.at("switch_fraction").get<double>();
        c.threshold = j.at("threshold").get<double>();
        log.params_digest = j.at("params_digest").get<std::string>();
        continue;
      }
      training::RoundRecord r;
      r.round = j.at("round").get<long>();
      const std::string mode = j.at("mode").get<std::string>();
      if (mode == model::OptimizerModeName(model::OptimizerMode::kSgd)) {
        r.mode = model::OptimizerMode::kSgd;
      } else if (mode == model::OptimizerModeName(model::OptimizerMode::kAdam)) {
        r.mode = model::OptimizerMode::kAdam;
      } else {
        throw Error(ErrorKind::kFormat, "training log: unknown mode '" + mode + "'");
      }
      r.learning_rate = j.at("learning_rate").get<double>();
      r.batch_total = j.at("batch_total").get<std::size_t>();
      r.batch_sizes = j.at("batch_sizes").get<std::vector<std::size_t>>();
      r.loss = j.at("loss").get<double>();
      r.w_prev = j.at("w_prev").get<linalg::Vec>();
      r.mu = j.at("mu").get<linalg::Vec>();
      log.rounds.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::kFormat,
                  "training log line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!have_summary) throw Error(ErrorKind::kFormat, "training log: missing summary line");
  return log;
}

certify::FairnessCertificate certify_from_log(const model::ModelParams& params,
                                              const TrainingLog& log,
                                              const data::TabularDataset& train,
                                              metrics::FairnessMetric metric) {
  if (params_digest(params) != log.params_digest) {
    throw Error(ErrorKind::kMismatch, "certify: training log does not belong to this checkpoint");
  }
  if (params.penultimate_dim() == 0 || train.dim() != params.input_dim()) {
    throw Error(ErrorKind::kMismatch, "certify: dataset does not match the checkpoint");
  }
  const training::RoundRecord* last = nullptr;
  for (const auto& r : log.rounds) {
    if (r.mode == model::OptimizerMode::kSgd) last = &r;
  }
  if (last == nullptr) {
    throw Error(ErrorKind::kInvalidParameter, "certify: training log has no SGD rounds");
  }
  if (last->w_prev.size() != params.penultimate_dim()) {
    throw Error(ErrorKind::kMismatch, "certify: round record does not match the checkpoint");
  }
  const certify::CertContext ctx = certify::CertContext::FromRound(*last, log.config, log.num_groups);
  return certify::certify(ctx, train, data::partition_by_group(train), metric, params);
}

void write_run(const RunResult& run) {
  if (run.spec.out.empty()) throw Error(ErrorKind::kInvalidParameter, "write_run: no output directory");
  std::error_code ec;
  std::filesystem::create_directories(run.spec.out, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create '" + run.spec.out + "': " + ec.message());
  const std::filesystem::path dir(run.spec.out);
  write_json((dir / "spec.json").string(), to_json(run.spec));
  model::save_checkpoint(run.params, (dir / "checkpoint.json").string());
  write_text((dir / "train_log.jsonl").string(), training_log(run));
  write_json((dir / "privacy.json").string(), run.privacy);
  if (run.certificate) write_json((dir / "certificate.json").string(), certify::to_json(*run.certificate));
  write_json((dir / "metrics.json").string(), metrics_json(run));
  write_text((dir / "metrics.csv").string(), metrics::to_csv(run.test_eval));
}

std::string SweepAxisName(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kEpsilon:
      return "epsilon";
    case SweepAxis::kRho:
      return "rho";
    case SweepAxis::kClipM:
      return "clip-m";
  }
  return "unknown";
}

SweepAxis ParseSweepAxis(const std::string& name) {
  for (SweepAxis a : {SweepAxis::kEpsilon, SweepAxis::kRho, SweepAxis::kClipM}) {
    if (SweepAxisName(a) == name) return a;
  }
  if (name == "M" || name == "m") return SweepAxis::kClipM;
  throw Error(ErrorKind::kInvalidParameter, "unknown sweep axis '" + name + "'");
}

std::vector<SweepRow> sweep(const ExperimentSpec& spec, SweepAxis axis,
                            const std::vector<double>& values) {
  if (values.empty()) throw Error(ErrorKind::kInvalidParameter, "sweep: empty value list");
  const data::TabularDataset full = data::load_csv(spec.dataset, spec.schema);
  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < values.size(); ++i) {
    SweepRow row;
    row.value = values[i];
    try {
      ExperimentSpec point = spec;
      switch (axis) {
        case SweepAxis::kEpsilon:
          point.target_epsilon = values[i];
          break;
        case SweepAxis::kRho:
          point.rho = values[i];
          break;
        case SweepAxis::kClipM:
          point.train.clip_m = values[i];
          point.clip_m_set = true;
          break;
      }
      if (!spec.out.empty()) {
        point.out = (std::filesystem::path(spec.out) / ("point-" + std::to_string(i))).string();
      }
      point.validate();
      const RunResult run = run_experiment(point, prepare_data(full, point));
      if (!point.out.empty()) write_run(run);
      row.ok = true;
      row.epsilon = run.epsilon;
      row.accuracy = run.test_eval.accuracy;
      row.precision = run.test_eval.precision;
      row.gaps = run.test_gaps;
      if (run.certificate) {
        row.tau_theoretical = run.certificate->tau_theoretical;
        row.tau_empirical = run.certificate->tau_empirical;
      }
    } catch (const Error& e) {
      row.error = std::string(ErrorKindName(e.kind())) + ": " + e.what();
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

json to_json(const std::vector<SweepRow>& rows, SweepAxis axis) {
  json arr = json::array();
  for (const auto& r : rows) {
    json row = {{"axis", SweepAxisName(axis)}, {"value", r.value}, {"ok", r.ok}};
    if (!r.ok) {
      row["error"] = r.error;
    } else {
      row["epsilon_achieved"] = number_json(r.epsilon);
      row["accuracy"] = r.accuracy;
      row["precision"] = optional_json(r.precision);
      row["demographic_parity_gap"] = optional_json(r.gaps.demographic_parity);
      row["equal_opportunity_gap"] = optional_json(r.gaps.equal_opportunity);
      row["equal_odds_gap"] = optional_json(r.gaps.equal_odds);
      row["tau_theoretical"] = optional_json(r.tau_theoretical);
      row["tau_empirical"] = optional_json(r.tau_empirical);
    }
    arr.push_back(std::move(row));
  }
  return arr;
}

std::string to_csv(const std::vector<SweepRow>& rows, SweepAxis axis) {
  std::string out = SweepAxisName(axis) +
                    ",status,epsilon_achieved,accuracy,precision,dp_gap,eo_gap,odds_gap,"
                    "tau_theoretical,tau_empirical,error\n";
  for (const auto& r : rows) {
    out += csv_number(r.value) + ',' + (r.ok ? "ok" : "failed") + ',';
    if (r.ok) {
      out += (std::isfinite(r.epsilon) ? csv_number(r.epsilon) : std::string("inf")) + ',' +
             csv_number(r.accuracy) + ',' + csv_number(r.precision) + ',' +
             csv_number(r.gaps.demographic_parity) + ',' + csv_number(r.gaps.equal_opportunity) +
             ',' + csv_number(r.gaps.equal_odds) + ',' + csv_number(r.tau_theoretical) + ',' +
             csv_number(r.tau_empirical) + ",\n";
    } else {
      std::string msg = r.error;
      for (char& ch : msg) {
        if (ch == '"') ch = '\'';
      }
      out += ",,,,,,,,\"" + msg + "\"\n";
    }
  }
  return out;
}

PartitionReport partition_report(const ExperimentSpec& spec) {
  const data::TabularDataset full = data::load_csv(spec.dataset, spec.schema);
  const PreparedData prepared = prepare_data(full, spec);
  return {summarize(full), summarize(prepared.train), summarize(prepared.test)};
}

json to_json(const PartitionReport& report) {
  return {{"full", summaries_json(report.full)},
          {"train", summaries_json(report.train)},
          {"test", summaries_json(report.test)}};
}

std::string to_csv(const PartitionReport& report) {
  std::string out = "split,group,name,size,positives,base_rate\n";
  auto emit = [&](const char* split, const std::vector<GroupSummary>& groups) {
    for (std::size_t k = 0; k < groups.size(); ++k) {
      const auto& g = groups[k];
      out += std::string(split) + ',' + std::to_string(k) + ",\"" + g.name + "\"," +
             std::to_string(g.size) + ',' + std::to_string(g.positives) + ',' +
             (g.size > 0 ? csv_number(static_cast<double>(g.positives) /
                                      static_cast<double>(g.size))
                         : std::string()) +
             '\n';
    }
  };
  emit("full", report.full);
  emit("train", report.train);
  emit("test", report.test);
  return out;
}

void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw Error(ErrorKind::kIo, "failed writing '" + path + "'");
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace fairdp::experiment
