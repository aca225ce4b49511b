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

#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "fairdp/error.h"
#include "oracles.h"

namespace fairdp::metrics {
namespace {

struct Fixture {
  data::TabularDataset ds;
  data::GroupPartition part;
};

Fixture make(const std::vector<int>& groups, const std::vector<int>& labels) {
  Fixture f;
  f.ds.features = linalg::Mat(groups.size(), 1);
  f.ds.group = groups;
  f.ds.labels = labels;
  int k = 0;
  for (int g : groups) k = std::max(k, g + 1);
  f.ds.num_groups = k;
  for (int i = 0; i < k; ++i) f.ds.group_names.push_back("g" + std::to_string(i));
  f.part = data::partition_by_group(f.ds);
  return f;
}

std::vector<double> as_probs(const std::vector<int>& preds) {
  std::vector<double> p;
  for (int v : preds) p.push_back(v ? 0.9 : 0.1);
  return p;
}

TEST_CASE("hand-enumerated table") {
  const auto f = make({0, 0, 0, 0, 1, 1, 1, 1}, {1, 1, 0, 0, 1, 0, 0, 1});
  const auto eval = evaluate(as_probs({1, 1, 0, 1, 0, 1, 0, 0}), f.ds, f.part);
  const auto& a = eval.table.groups[0];
  const auto& b = eval.table.groups[1];
  CHECK(a.positive_rate() == 0.75);
  CHECK(b.positive_rate() == 0.25);
  CHECK(a.tp == 2);
  CHECK(a.fp == 1);
  CHECK(a.tn == 1);
  CHECK(a.fn == 0);
  CHECK(b.tp == 0);
  CHECK(b.fp == 1);
  CHECK(b.tn == 1);
  CHECK(b.fn == 2);
  CHECK(a.size() + b.size() == 8);
  CHECK(eval.accuracy == 4.0 / 8.0);
  CHECK(*eval.precision == 2.0 / 4.0);
  CHECK(*fairness_gap(eval.table, FairnessMetric::kDemographicParity) == 0.5);
  CHECK(*fairness_gap(eval.table, FairnessMetric::kEqualOpportunity) == 1.0);
  CHECK(*fairness_gap(eval.table, FairnessMetric::kEqualOdds) == 1.0);
}

TEST_CASE("degenerate predictors") {
  const std::vector<int> labels{1, 0, 1, 1, 0, 1};
  const auto f = make({0, 0, 0, 1, 1, 1}, labels);
  const auto perfect = evaluate(as_probs(labels), f.ds, f.part);
  CHECK(perfect.accuracy == 1.0);
  // Equal base rates (2/3 in both groups) give zero gaps.
  CHECK(*fairness_gap(perfect.table, FairnessMetric::kDemographicParity) == 0.0);
  CHECK(*fairness_gap(perfect.table, FairnessMetric::kEqualOdds) == 0.0);

  const auto unequal = make({0, 0, 0, 1, 1, 1}, {1, 0, 0, 1, 0, 1});
  const auto perfect2 = evaluate(as_probs({1, 0, 0, 1, 0, 1}), unequal.ds, unequal.part);
  CHECK(*fairness_gap(perfect2.table, FairnessMetric::kDemographicParity) > 0.0);
  CHECK(*fairness_gap(perfect2.table, FairnessMetric::kEqualOdds) == 0.0);

  const auto positive = evaluate(std::vector<double>(6, 0.99), f.ds, f.part);
  CHECK(*fairness_gap(positive.table, FairnessMetric::kDemographicParity) == 0.0);

  const auto negative = evaluate(std::vector<double>(6, 0.01), f.ds, f.part);
  CHECK_FALSE(negative.precision.has_value());
}

TEST_CASE("ties predict the negative class") {
  const auto f = make({0, 1}, {1, 1});
  const auto eval = evaluate(std::vector<double>{0.5, 0.5000001}, f.ds, f.part);
  CHECK(eval.table.groups[0].fn == 1);
  CHECK(eval.table.groups[1].tp == 1);
  const auto high = evaluate(std::vector<double>{0.6, 0.8}, f.ds, f.part, 0.7);
  CHECK(high.table.groups[0].fn == 1);
}

TEST_CASE("rate gaps") {
  GroupOutcomeTable t;
  t.groups = {{1, 1, 1, 1}, {1, 2, 2, 1}, {3, 0, 4, 3}};
  CHECK(*t.groups[0].tpr() == 0.5);
  CHECK(*t.groups[1].tpr() == 0.5);
  CHECK(*t.groups[2].tpr() == 0.5);
  CHECK(*fairness_gap(t, FairnessMetric::kEqualOpportunity) == 0.0);

  // TPRs 0.5 / 0.6, FPRs 0.2 / 0.5.
  t.groups = {{5, 2, 8, 5}, {6, 5, 5, 4}};
  CHECK(*fairness_gap(t, FairnessMetric::kEqualOpportunity) == doctest::Approx(0.1));
  CHECK(*fairness_gap(t, FairnessMetric::kEqualOdds) == doctest::Approx(0.3));

  t.groups = {{0, 1, 1, 0}, {1, 1, 1, 1}};
  CHECK_FALSE(t.groups[0].tpr().has_value());
  CHECK_FALSE(fairness_gap(t, FairnessMetric::kEqualOpportunity).has_value());
  CHECK_FALSE(fairness_gap(t, FairnessMetric::kEqualOdds).has_value());
  CHECK(fairness_gap(t, FairnessMetric::kDemographicParity).has_value());
}

TEST_CASE("gaps are permutation invariant and bounded") {
  linalg::RngStream rng(1, 0);
  for (int trial = 0; trial < 50; ++trial) {
    GroupOutcomeTable t;
    for (int k = 0; k < 4; ++k) {
      t.groups.push_back({1 + rng.next_u64() % 9, 1 + rng.next_u64() % 9, 1 + rng.next_u64() % 9,
                          1 + rng.next_u64() % 9});
    }
    GroupOutcomeTable r = t;
    std::reverse(r.groups.begin(), r.groups.end());
    for (auto m : {FairnessMetric::kDemographicParity, FairnessMetric::kEqualOpportunity,
                   FairnessMetric::kEqualOdds}) {
      const double g = *fairness_gap(t, m);
      CHECK(g == *fairness_gap(r, m));
      CHECK(g >= 0.0);
      CHECK(g <= 1.0);
    }
  }
}

TEST_CASE("demographic parity two ways") {
  oracle::SyntheticSpec spec;
  spec.group_sizes = {80, 50, 30};
  const auto ds = oracle::synthetic_dataset(spec);
  const auto part = data::partition_by_group(ds);
  linalg::RngStream rng(2, 0);
  const auto model = model::init_params(ds.dim(), {5}, rng);
  const auto probs = predict_probabilities(model, ds);
  const auto eval = evaluate(model, ds, part);
  CHECK(evaluate(probs, ds, part).accuracy == eval.accuracy);

  std::vector<double> pos(3, 0.0), count(3, 0.0);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    pos[ds.group[i]] += probs[i] > 0.5 ? 1.0 : 0.0;
    count[ds.group[i]] += 1.0;
  }
  double lo = 1.0, hi = 0.0;
  for (int k = 0; k < 3; ++k) {
    lo = std::min(lo, pos[k] / count[k]);
    hi = std::max(hi, pos[k] / count[k]);
  }
  CHECK(*fairness_gap(eval.table, FairnessMetric::kDemographicParity) == doctest::Approx(hi - lo));
}

TEST_CASE("names, serialisation and errors") {
  CHECK(ParseFairnessMetric("dp") == FairnessMetric::kDemographicParity);
  CHECK(ParseFairnessMetric("none") == FairnessMetric::kDemographicParity);
  CHECK(ParseFairnessMetric("equal-opportunity") == FairnessMetric::kEqualOpportunity);
  CHECK(ParseFairnessMetric("positive-label") == FairnessMetric::kEqualOpportunity);
  CHECK(ParseFairnessMetric("odds") == FairnessMetric::kEqualOdds);
  CHECK_THROWS_AS(ParseFairnessMetric("accuracy"), Error);
  for (auto m : {FairnessMetric::kDemographicParity, FairnessMetric::kEqualOpportunity,
                 FairnessMetric::kEqualOdds}) {
    CHECK(ParseFairnessMetric(FairnessMetricName(m)) == m);
  }

  const auto f = make({0, 0, 1, 1}, {1, 0, 1, 1});
  const auto eval = evaluate(as_probs({1, 0, 0, 1}), f.ds, f.part);
  const auto j = to_json(eval);
  CHECK(j["groups"].size() == 2);
  CHECK(j["groups"][1]["fpr"].is_null());
  const std::string csv = to_csv(eval);
  CHECK(csv.rfind("group,size,tp,fp,tn,fn,positive_rate,tpr,fpr\n", 0) == 0);
  CHECK(csv.find("\n1,2,1,0,0,1,0.5,0.5,\n") != std::string::npos);

  CHECK_THROWS_AS(evaluate(std::vector<double>{0.1}, f.ds, f.part), Error);
  data::TabularDataset empty;
  CHECK_THROWS_AS(evaluate(std::vector<double>{}, empty, data::GroupPartition{}), Error);
}

}  // namespace
}  // namespace fairdp::metrics
