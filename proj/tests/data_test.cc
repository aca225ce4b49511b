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

#include "fairdp/data.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "fairdp/error.h"
#include "oracles.h"

namespace fairdp::data {
namespace {

CsvSchema schema(std::vector<std::string> protected_columns, std::string label) {
  CsvSchema s;
  s.protected_columns = std::move(protected_columns);
  s.label_column = std::move(label);
  return s;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::kIo;
}

TEST_CASE("numeric columns are min-max scaled") {
  const auto ds = parse_csv("a,b,sex,y\n1,10,f,0\n3,30,m,1\n2,20,f,1\n", schema({"sex"}, "y"));
  REQUIRE(ds.size() == 3);
  REQUIRE(ds.dim() == 2);
  CHECK(ds.features(0, 0) == 0.0);
  CHECK(ds.features(1, 0) == 1.0);
  CHECK(ds.features(2, 0) == 0.5);
  CHECK(ds.features(1, 1) == 1.0);
  CHECK(ds.labels == std::vector<int>{0, 1, 1});
  CHECK(ds.group == std::vector<int>{0, 1, 0});
  CHECK(ds.group_names == std::vector<std::string>{"f", "m"});
  CHECK(ds.feature_names == std::vector<std::string>{"a", "b"});
}

TEST_CASE("categorical columns are one-hot encoded and decodable") {
  const auto ds = parse_csv("c,x,g,y\nred,1,a,0\nblue,2,b,1\ngreen,3,a,0\nred,4,b,1\n",
                            schema({"g"}, "y"));
  REQUIRE(ds.one_hot_blocks.size() == 1);
  CHECK(ds.dim() == 4);
  const auto& block = ds.one_hot_blocks[0];
  CHECK(block.levels == std::vector<std::string>{"blue", "green", "red"});
  CHECK(decode_one_hot(ds, block, 0) == "red");
  CHECK(decode_one_hot(ds, block, 1) == "blue");
  CHECK(decode_one_hot(ds, block, 2) == "green");
  for (std::size_t i = 0; i < ds.size(); ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < 3; ++j) sum += ds.features(i, block.first_feature + j);
    CHECK(sum == 1.0);
  }
}

TEST_CASE("constant columns, quotes and missing values") {
  // Only empty fields are missing; "?" is an ordinary category.
  const auto ds = parse_csv(
      "x,name,g,y\n5,\"a, b\",u,1\n5,\"c\",v,0\n5,?,u,1\n,\"d\",v,0\n", schema({"g"}, "y"));
  CHECK(ds.size() == 3);
  REQUIRE(ds.one_hot_blocks.size() == 1);
  CHECK(ds.one_hot_blocks[0].levels == std::vector<std::string>{"?", "a, b", "c"});
  CHECK(ds.features(0, 0) == 0.0);
  CHECK(ds.features(1, 0) == 0.0);
}

TEST_CASE("malformed input") {
  CHECK(kind_of([] { parse_csv("x,g,y\n1,a,2\n2,b,0\n", schema({"g"}, "y")); }) ==
        ErrorKind::kDomain);
  CHECK(kind_of([] { parse_csv("x,g,y\n1,a,1\n", schema({"g"}, "label")); }) ==
        ErrorKind::kSchema);
  CHECK(kind_of([] { parse_csv("x,g,y\n1,a\n", schema({"g"}, "y")); }) == ErrorKind::kFormat);
  CHECK(kind_of([] { load_csv("/nonexistent/file.csv", schema({"g"}, "y")); }) ==
        ErrorKind::kIo);
}

TEST_CASE("partition by group") {
  TabularDataset ds;
  ds.features = linalg::Mat(4, 1);
  ds.group = {0, 1, 0, 1};
  ds.labels = {0, 1, 1, 0};
  ds.num_groups = 2;
  ds.group_names = {"a", "b"};
  const auto part = partition_by_group(ds);
  CHECK(part.groups == std::vector<RowIndices>{{0, 2}, {1, 3}});

  ds.group = {0, 0, 0, 0};
  CHECK(kind_of([&] { partition_by_group(ds); }) == ErrorKind::kDegenerateGroup);
}

TEST_CASE("partition is invariant to row order") {
  oracle::SyntheticSpec spec;
  spec.group_sizes = {30, 20, 10};
  const auto ds = synthetic_dataset(spec);
  RowIndices perm(ds.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = (i * 37) % perm.size();
  const auto shuffled = subset(ds, perm);
  const auto a = partition_by_group(ds);
  const auto b = partition_by_group(shuffled);
  for (int k = 0; k < 3; ++k) {
    std::multiset<std::vector<double>> rows_a, rows_b;
    for (auto i : a.groups[k]) rows_a.insert({ds.features.row(i).begin(), ds.features.row(i).end()});
    for (auto i : b.groups[k]) {
      rows_b.insert({shuffled.features.row(i).begin(), shuffled.features.row(i).end()});
    }
    CHECK(rows_a == rows_b);
  }
}

TEST_CASE("cross product of protected attributes") {
  const std::string csv = "x,sex,race,y\n1,f,a,0\n2,f,b,1\n3,m,a,0\n4,m,b,1\n";
  const auto single = parse_csv(csv, schema({"sex"}, "y"));
  const auto same = cross_product_groups(single, {"sex"});
  CHECK(same.group == single.group);

  const auto both = parse_csv(csv, schema({"sex", "race"}, "y"));
  CHECK(both.num_groups == 4);
  CHECK(both.group == std::vector<int>{0, 1, 2, 3});
  CHECK(both.group_names == std::vector<std::string>{"f|a", "f|b", "m|a", "m|b"});
  const auto part = partition_by_group(both);
  for (const auto& g : part.groups) CHECK(g.size() == 1);

  const auto race_only = cross_product_groups(both, {"race"});
  CHECK(race_only.group == std::vector<int>{0, 1, 0, 1});
  CHECK_THROWS_AS(cross_product_groups(both, {"age"}), Error);
}

TEST_CASE("event subsets") {
  TabularDataset ds;
  ds.features = linalg::Mat(5, 1);
  ds.group = {0, 0, 0, 1, 1};
  ds.labels = {1, 0, 1, 1, 1};
  ds.num_groups = 2;
  ds.group_names = {"a", "b"};
  const auto part = partition_by_group(ds);
  CHECK(event_subset(ds, part, 0, FairnessEvent::None()) == part.groups[0]);
  CHECK(event_subset(ds, part, 0, FairnessEvent::PositiveLabel()) == RowIndices{0, 2});
  CHECK(event_subset(ds, part, 0, FairnessEvent::LabelEquals(0)) == RowIndices{1});
  CHECK(kind_of([&] { event_subset(ds, part, 1, FairnessEvent::LabelEquals(0)); }) ==
        ErrorKind::kEmptyEvent);
  CHECK(FairnessEvent::None().name() == "none");
  CHECK(FairnessEvent::PositiveLabel().name() == "positive-label");
  CHECK(FairnessEvent::LabelEquals(0).name() == "label-0");
}

TEST_CASE("majority subsampling") {
  oracle::SyntheticSpec spec;
  spec.group_sizes = {100, 40};
  const auto ds = synthetic_dataset(spec);
  linalg::RngStream rng(5, 0);

  const auto equal = subsample_major(ds, 1.0, rng);
  auto part = partition_by_group(equal);
  CHECK(part.group_size(0) == 40);
  CHECK(part.group_size(1) == 40);

  const auto ratio2 = subsample_major(ds, 2.0, rng);
  part = partition_by_group(ratio2);
  CHECK(part.group_size(0) == 80);
  CHECK(part.group_size(1) == 40);

  const auto ratio_large = subsample_major(ds, 10.0, rng);
  CHECK(ratio_large.size() == ds.size());

  spec.group_sizes = {50, 50};
  const auto balanced = synthetic_dataset(spec);
  const auto same = subsample_major(balanced, 1.0, rng);
  CHECK(same.features == balanced.features);
  CHECK(same.labels == balanced.labels);
  CHECK_THROWS_AS(subsample_major(ds, 0.5, rng), Error);
}

TEST_CASE("poisson batches") {
  GroupPartition part;
  part.groups.emplace_back(100000);
  for (std::size_t i = 0; i < 100000; ++i) part.groups[0][i] = i;

  linalg::RngStream rng(3, 0);
  CHECK(poisson_batch(part, 0, 1.0, rng) == part.groups[0]);
  CHECK_THROWS_AS(poisson_batch(part, 0, 0.0, rng), Error);

  const double n = 100000, q = 0.5;
  const int trials = 100;
  double total = 0.0;
  for (int t = 0; t < trials; ++t) total += poisson_batch(part, 0, q, rng).size();
  const double mean = total / trials;
  CHECK(std::fabs(mean - n * q) <= 3.0 * std::sqrt(n * q * (1 - q) / trials));

  linalg::RngStream a(11, 4), b(11, 4);
  CHECK(poisson_batch(part, 0, 0.01, a) == poisson_batch(part, 0, 0.01, b));
  CHECK_THROWS_AS(poisson_batch(part, 0, 1.5, rng), Error);
}

TEST_CASE("stratified split keeps every stratum") {
  oracle::SyntheticSpec spec;
  spec.group_sizes = {200, 100};
  const auto ds = synthetic_dataset(spec);
  linalg::RngStream rng(9, 0);
  const auto split = stratified_split(ds, 0.25, rng);
  CHECK(split.train.size() + split.test.size() == ds.size());
  std::map<std::pair<int, int>, int> all, test;
  for (std::size_t i = 0; i < ds.size(); ++i) ++all[{ds.group[i], ds.labels[i]}];
  for (std::size_t i = 0; i < split.test.size(); ++i) ++test[{split.test.group[i], split.test.labels[i]}];
  for (const auto& [key, count] : all) {
    CHECK(test[key] == static_cast<int>(std::llround(0.25 * count)));
  }
  linalg::RngStream rng2(9, 0);
  const auto again = stratified_split(ds, 0.25, rng2);
  CHECK(again.test.features == split.test.features);
}

}  // namespace
}  // namespace fairdp::data
