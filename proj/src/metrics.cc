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

#include "fairdp/metrics.h"

#include <algorithm>
#include <sstream>

#include "fairdp/error.h"

namespace fairdp::metrics {
namespace {

double ratio(std::size_t num, std::size_t den) {
  return static_cast<double>(num) / static_cast<double>(den);
}

// Max pairwise |a - b| over defined rates; nullopt if any group is undefined.
std::optional<double> max_pairwise_gap(const std::vector<std::optional<double>>& rates) {
  double lo = 1.0, hi = 0.0;
  for (const auto& r : rates) {
    if (!r) return std::nullopt;
    lo = std::min(lo, *r);
    hi = std::max(hi, *r);
  }
  return rates.empty() ? 0.0 : std::max(0.0, hi - lo);
}

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

double GroupOutcome::positive_rate() const {
  return size() == 0 ? 0.0 : ratio(tp + fp, size());
}

std::optional<double> GroupOutcome::tpr() const {
  if (positives() == 0) return std::nullopt;
  return ratio(tp, positives());
}

std::optional<double> GroupOutcome::fpr() const {
  if (negatives() == 0) return std::nullopt;
  return ratio(fp, negatives());
}

std::string FairnessMetricName(FairnessMetric metric) {
  switch (metric) {
    case FairnessMetric::kDemographicParity: return "demographic-parity";
    case FairnessMetric::kEqualOpportunity: return "equal-opportunity";
    case FairnessMetric::kEqualOdds: return "equal-odds";
  }
  return "unknown";
}

FairnessMetric ParseFairnessMetric(const std::string& name) {
  // Conditioning-event names are accepted for the two single-event metrics.
  if (name == "demographic-parity" || name == "dp" || name == "none") return FairnessMetric::kDemographicParity;
  if (name == "equal-opportunity" || name == "eo" || name == "positive-label") return FairnessMetric::kEqualOpportunity;
  if (name == "equal-odds" || name == "odds") return FairnessMetric::kEqualOdds;
  throw Error(ErrorKind::kInvalidParameter, "unknown fairness metric '" + name + "'");
}

Evaluation evaluate(std::span<const double> probabilities, const data::TabularDataset& ds,
                    const data::GroupPartition& part, double threshold) {
  if (ds.size() == 0) throw Error(ErrorKind::kInvalidParameter, "evaluate: empty dataset");
  if (probabilities.size() != ds.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "evaluate: one probability per row required");
  }
  Evaluation eval;
  eval.table.groups.resize(static_cast<std::size_t>(part.num_groups()));
  std::size_t correct = 0, tp = 0, fp = 0;
  for (int k = 0; k < part.num_groups(); ++k) {
    GroupOutcome& out = eval.table.groups[k];
    for (std::size_t i : part.groups[k]) {
      const bool pred = probabilities[i] > threshold;
      const bool label = ds.labels[i] == 1;
      if (pred && label) ++out.tp;
      else if (pred && !label) ++out.fp;
      else if (!pred && label) ++out.fn;
      else ++out.tn;
    }
    correct += out.tp + out.tn;
    tp += out.tp;
    fp += out.fp;
  }
  eval.accuracy = ratio(correct, ds.size());
  if (tp + fp > 0) eval.precision = ratio(tp, tp + fp);
  return eval;
}

std::vector<double> predict_probabilities(const model::ModelParams& model,
                                          const data::TabularDataset& ds) {
  std::vector<double> probs(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    probs[i] = linalg::sigmoid(model::predict_logit(model, ds.features.row(i)));
  }
  return probs;
}

Evaluation evaluate(const model::ModelParams& model, const data::TabularDataset& ds,
                    const data::GroupPartition& part, double threshold) {
  return evaluate(predict_probabilities(model, ds), ds, part, threshold);
}

std::optional<double> fairness_gap(const GroupOutcomeTable& table, FairnessMetric metric) {
  std::vector<std::optional<double>> a, b;
  for (const auto& g : table.groups) {
    switch (metric) {
      case FairnessMetric::kDemographicParity:
        a.emplace_back(g.size() == 0 ? std::nullopt : std::optional<double>(g.positive_rate()));
        break;
      case FairnessMetric::kEqualOpportunity:
        a.push_back(g.tpr());
        break;
      case FairnessMetric::kEqualOdds:
        a.push_back(g.tpr());
        b.push_back(g.fpr());
        break;
    }
  }
  const auto gap_a = max_pairwise_gap(a);
  if (metric != FairnessMetric::kEqualOdds) return gap_a;
  const auto gap_b = max_pairwise_gap(b);
  if (!gap_a || !gap_b) return std::nullopt;
  return std::max(*gap_a, *gap_b);
}

nlohmann::json to_json(const Evaluation& eval) {
  nlohmann::json groups = nlohmann::json::array();
  for (std::size_t k = 0; k < eval.table.groups.size(); ++k) {
    const auto& g = eval.table.groups[k];
    groups.push_back({{"group", k},
                      {"size", g.size()},
                      {"tp", g.tp},
                      {"fp", g.fp},
                      {"tn", g.tn},
                      {"fn", g.fn},
                      {"positive_rate", g.positive_rate()},
                      {"tpr", optional_json(g.tpr())},
                      {"fpr", optional_json(g.fpr())}});
  }
  return {{"accuracy", eval.accuracy},
          {"precision", optional_json(eval.precision)},
          {"demographic_parity_gap",
           optional_json(fairness_gap(eval.table, FairnessMetric::kDemographicParity))},
          {"equal_opportunity_gap",
           optional_json(fairness_gap(eval.table, FairnessMetric::kEqualOpportunity))},
          {"equal_odds_gap", optional_json(fairness_gap(eval.table, FairnessMetric::kEqualOdds))},
          {"groups", groups}};
}

std::string to_csv(const Evaluation& eval) {
  std::ostringstream out;
  out.precision(17);
  out << "group,size,tp,fp,tn,fn,positive_rate,tpr,fpr\n";
  for (std::size_t k = 0; k < eval.table.groups.size(); ++k) {
    const auto& g = eval.table.groups[k];
    out << k << ',' << g.size() << ',' << g.tp << ',' << g.fp << ',' << g.tn << ',' << g.fn
        << ',' << g.positive_rate() << ',';
    if (g.tpr()) out << *g.tpr();
    out << ',';
    if (g.fpr()) out << *g.fpr();
    out << '\n';
  }
  return out.str();
}

}  // namespace fairdp::metrics
