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

// Tabular ingestion and protected-group bookkeeping.
//
// A dataset is a feature matrix plus, per row, a protected-group code in
// [0, K) and a binary label. Numeric CSV columns are min-max scaled into
// [0, 1]; categorical columns are one-hot encoded with levels in sorted
// order. Protected columns are kept out of the feature matrix and, when more
// than one is given, combined into a single cross-product code.

#ifndef FAIRDP_DATA_H_
#define FAIRDP_DATA_H_

#include <cstddef>
#include <string>
#include <vector>

#include "fairdp/linalg.h"

namespace fairdp::data {

using RowIndices = std::vector<std::size_t>;

// One categorical protected column, label-encoded.
struct ProtectedAttribute {
  std::string name;
  std::vector<std::string> levels;
  std::vector<int> codes;
};

// Location of a one-hot encoded categorical column inside the feature matrix.
struct OneHotBlock {
  std::string column;
  std::vector<std::string> levels;
  std::size_t first_feature = 0;
};

struct TabularDataset {
  linalg::Mat features;
  // Active protected-group code per row, in [0, num_groups).
  std::vector<int> group;
  std::vector<int> labels;
  int num_groups = 0;
  std::vector<std::string> group_names;

  // Raw protected columns the active code was derived from.
  std::vector<ProtectedAttribute> attributes;
  std::vector<std::string> feature_names;
  std::vector<OneHotBlock> one_hot_blocks;

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return features.cols(); }

  // Throws on any violated invariant (length mismatch, label outside {0,1},
  // group code outside [0, num_groups)).
  void validate() const;
};

struct GroupPartition {
  std::vector<RowIndices> groups;

  int num_groups() const { return static_cast<int>(groups.size()); }
  std::size_t group_size(int k) const { return groups[k].size(); }
};

struct FairnessEvent {
  enum class Kind { kNone, kPositiveLabel, kLabelEquals };
  Kind kind = Kind::kNone;
  int label = 1;  // used by kLabelEquals

  static FairnessEvent None() { return {Kind::kNone, 1}; }
  static FairnessEvent PositiveLabel() { return {Kind::kPositiveLabel, 1}; }
  static FairnessEvent LabelEquals(int y) { return {Kind::kLabelEquals, y}; }

  std::string name() const;
  bool matches(int label_value) const;
};

struct CsvSchema {
  // Empty means every column other than the protected and label columns.
  std::vector<std::string> feature_columns;
  std::vector<std::string> protected_columns;
  std::string label_column;
};

TabularDataset load_csv(const std::string& path, const CsvSchema& schema);
TabularDataset parse_csv(const std::string& text, const CsvSchema& schema);

// Recovers the category of `block` stored in row `row`.
std::string decode_one_hot(const TabularDataset& ds, const OneHotBlock& block,
                           std::size_t row);

GroupPartition partition_by_group(const TabularDataset& ds);

// Replaces the active group code with the cross product of the named
// protected attributes (mixed radix, first attribute most significant).
TabularDataset cross_product_groups(const TabularDataset& ds,
                                    const std::vector<std::string>& attribute_names);

RowIndices event_subset(const TabularDataset& ds, const GroupPartition& part, int k,
                        const FairnessEvent& event);

TabularDataset subset(const TabularDataset& ds, const RowIndices& rows);

// Downsamples every group larger than floor(rho * smallest group) to that
// size, uniformly without replacement. Rows keep their relative order.
TabularDataset subsample_major(const TabularDataset& ds, double rho,
                               linalg::RngStream& rng);

// Independent inclusion of each row of group k with probability q.
RowIndices poisson_batch(const GroupPartition& part, int k, double q,
                         linalg::RngStream& rng);

struct TrainTestSplit {
  TabularDataset train;
  TabularDataset test;
};

// Stratified by (group, label); test_fraction of each stratum (rounded to
// nearest) goes to the test split.
TrainTestSplit stratified_split(const TabularDataset& ds, double test_fraction,
                                linalg::RngStream& rng);

}  // namespace fairdp::data

#endif  // FAIRDP_DATA_H_
