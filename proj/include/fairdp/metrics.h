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

#ifndef FAIRDP_METRICS_H_
#define FAIRDP_METRICS_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairdp/data.h"
#include "fairdp/model.h"
#include "json.hpp"

namespace fairdp::metrics {

struct GroupOutcome {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

  std::size_t size() const { return tp + fp + tn + fn; }
  std::size_t positives() const { return tp + fn; }
  std::size_t negatives() const { return fp + tn; }
  double positive_rate() const;
  // Undefined when the group has no positive (resp. negative) labels.
  std::optional<double> tpr() const;
  std::optional<double> fpr() const;
};

struct GroupOutcomeTable {
  std::vector<GroupOutcome> groups;
};

struct Evaluation {
  GroupOutcomeTable table;
  double accuracy = 0.0;
  // Undefined when nothing is predicted positive.
  std::optional<double> precision;
};

enum class FairnessMetric { kDemographicParity, kEqualOpportunity, kEqualOdds };

std::string FairnessMetricName(FairnessMetric metric);
FairnessMetric ParseFairnessMetric(const std::string& name);

// Hard predictions are probability > threshold; ties go to the negative class.
Evaluation evaluate(std::span<const double> probabilities, const data::TabularDataset& ds,
                    const data::GroupPartition& part, double threshold = 0.5);
Evaluation evaluate(const model::ModelParams& model, const data::TabularDataset& ds,
                    const data::GroupPartition& part, double threshold = 0.5);

std::vector<double> predict_probabilities(const model::ModelParams& model,
                                          const data::TabularDataset& ds);

// Max pairwise gap of the metric's rate across groups.
std::optional<double> fairness_gap(const GroupOutcomeTable& table, FairnessMetric metric);

nlohmann::json to_json(const Evaluation& eval);
// One row per group: group,size,tp,fp,tn,fn,positive_rate,tpr,fpr
std::string to_csv(const Evaluation& eval);

}  // namespace fairdp::metrics

#endif  // FAIRDP_METRICS_H_
