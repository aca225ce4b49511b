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
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "fairdp/error.h"

namespace fairdp::data {
namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

// Comma-delimited fields; double quotes group commas, "" escapes a quote.
std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(trim(cur));
  return fields;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

std::vector<std::string> sorted_levels(const std::vector<std::string>& values) {
  std::vector<std::string> levels(values);
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  return levels;
}

ProtectedAttribute label_encode(const std::string& name,
                                const std::vector<std::string>& values) {
  ProtectedAttribute attr;
  attr.name = name;
  attr.levels = sorted_levels(values);
  attr.codes.reserve(values.size());
  for (const auto& v : values) {
    const auto it = std::lower_bound(attr.levels.begin(), attr.levels.end(), v);
    attr.codes.push_back(static_cast<int>(it - attr.levels.begin()));
  }
  return attr;
}

// Sets ds.group / num_groups / group_names from the cross product of attrs.
void assign_product_code(TabularDataset& ds, const std::vector<const ProtectedAttribute*>& attrs) {
  std::size_t k_total = 1;
  for (const auto* a : attrs) k_total *= a->levels.size();
  const std::size_t n = ds.size();
  std::vector<int> code(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t c = 0;
    for (const auto* a : attrs) c = c * a->levels.size() + static_cast<std::size_t>(a->codes[i]);
    code[i] = static_cast<int>(c);
  }
  std::vector<std::size_t> counts(k_total, 0);
  for (int c : code) ++counts[c];

  std::vector<std::string> names(k_total);
  for (std::size_t c = 0; c < k_total; ++c) {
    std::size_t rem = c;
    std::vector<std::string> parts(attrs.size());
    for (std::size_t j = attrs.size(); j-- > 0;) {
      const std::size_t kj = attrs[j]->levels.size();
      parts[j] = attrs[j]->levels[rem % kj];
      rem /= kj;
    }
    std::string joined;
    for (std::size_t j = 0; j < parts.size(); ++j) {
      if (j) joined += "|";
      joined += parts[j];
    }
    names[c] = joined;
  }
  for (std::size_t c = 0; c < k_total; ++c) {
    if (counts[c] == 0) {
      throw Error(ErrorKind::kDegenerateGroup,
                  "protected combination '" + names[c] + "' has no rows");
    }
  }
  ds.group = std::move(code);
  ds.num_groups = static_cast<int>(k_total);
  ds.group_names = std::move(names);
}

}  // namespace

void TabularDataset::validate() const {
  const std::size_t n = labels.size();
  if (features.rows() != n || group.size() != n) {
    throw Error(ErrorKind::kDimensionMismatch, "dataset: features/group/labels lengths differ");
  }
  for (int y : labels) {
    if (y != 0 && y != 1) throw Error(ErrorKind::kDomain, "dataset: label outside {0,1}");
  }
  for (int g : group) {
    if (g < 0 || g >= num_groups) {
      throw Error(ErrorKind::kDomain, "dataset: group code outside [0, K)");
    }
  }
}

std::string FairnessEvent::name() const {
  switch (kind) {
    case Kind::kNone: return "none";
    case Kind::kPositiveLabel: return "positive-label";
    case Kind::kLabelEquals: return "label-" + std::to_string(label);
  }
  return "unknown";
}

bool FairnessEvent::matches(int label_value) const {
  switch (kind) {
    case Kind::kNone: return true;
    case Kind::kPositiveLabel: return label_value == 1;
    case Kind::kLabelEquals: return label_value == label;
  }
  return false;
}

TabularDataset load_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), schema);
}

TabularDataset parse_csv(const std::string& text, const CsvSchema& schema) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (!trim(line).empty()) {
      header = split_csv_line(line);
      break;
    }
  }
  if (header.empty()) throw Error(ErrorKind::kFormat, "csv: empty file");
  if (!header.empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0].erase(0, 3);

  std::map<std::string, std::size_t> col_index;
  for (std::size_t i = 0; i < header.size(); ++i) col_index[header[i]] = i;
  auto lookup = [&](const std::string& name) {
    const auto it = col_index.find(name);
    if (it == col_index.end()) throw Error(ErrorKind::kSchema, "csv: missing column '" + name + "'");
    return it->second;
  };

  if (schema.label_column.empty()) throw Error(ErrorKind::kSchema, "csv: no label column given");
  if (schema.protected_columns.empty()) {
    throw Error(ErrorKind::kSchema, "csv: no protected column given");
  }
  const std::size_t label_idx = lookup(schema.label_column);
  std::vector<std::size_t> protected_idx;
  for (const auto& c : schema.protected_columns) protected_idx.push_back(lookup(c));

  std::vector<std::string> feature_cols = schema.feature_columns;
  if (feature_cols.empty()) {
    for (const auto& h : header) {
      if (h == schema.label_column) continue;
      if (std::find(schema.protected_columns.begin(), schema.protected_columns.end(), h) !=
          schema.protected_columns.end())
        continue;
      feature_cols.push_back(h);
    }
  }
  std::vector<std::size_t> feature_idx;
  for (const auto& c : feature_cols) feature_idx.push_back(lookup(c));

  std::vector<std::size_t> used(feature_idx);
  used.push_back(label_idx);
  used.insert(used.end(), protected_idx.begin(), protected_idx.end());

  std::vector<std::vector<std::string>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw Error(ErrorKind::kFormat, "csv: line " + std::to_string(line_no) + " has " +
                                          std::to_string(fields.size()) + " fields, expected " +
                                          std::to_string(header.size()));
    }
    // Rows with a missing value in any used column are dropped.
    if (std::any_of(used.begin(), used.end(), [&](std::size_t i) { return fields[i].empty(); }))
      continue;
    rows.push_back(std::move(fields));
  }
  if (rows.empty()) throw Error(ErrorKind::kFormat, "csv: no data rows");
  const std::size_t n = rows.size();

  TabularDataset ds;
  ds.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string& v = rows[i][label_idx];
    if (v == "0") {
      ds.labels[i] = 0;
    } else if (v == "1") {
      ds.labels[i] = 1;
    } else {
      throw Error(ErrorKind::kDomain, "csv: label '" + v + "' is not binary (0/1)");
    }
  }

  // Per feature column: numeric when every value parses, categorical otherwise.
  struct Column {
    bool numeric;
    std::vector<double> values;
    std::vector<std::string> raw;
    std::vector<std::string> levels;
  };
  std::vector<Column> columns;
  std::size_t dim = 0;
  for (std::size_t c : feature_idx) {
    Column col;
    col.numeric = true;
    col.values.resize(n);
    for (std::size_t i = 0; i < n && col.numeric; ++i) {
      col.numeric = parse_double(rows[i][c], col.values[i]);
    }
    if (!col.numeric) {
      col.values.clear();
      col.raw.reserve(n);
      for (std::size_t i = 0; i < n; ++i) col.raw.push_back(rows[i][c]);
      col.levels = sorted_levels(col.raw);
      dim += col.levels.size();
    } else {
      dim += 1;
    }
    columns.push_back(std::move(col));
  }

  ds.features = linalg::Mat(n, dim);
  std::size_t offset = 0;
  for (std::size_t j = 0; j < columns.size(); ++j) {
    const Column& col = columns[j];
    if (col.numeric) {
      const auto [lo_it, hi_it] = std::minmax_element(col.values.begin(), col.values.end());
      const double lo = *lo_it, range = *hi_it - *lo_it;
      for (std::size_t i = 0; i < n; ++i) {
        ds.features(i, offset) = range > 0.0 ? (col.values[i] - lo) / range : 0.0;
      }
      ds.feature_names.push_back(feature_cols[j]);
      offset += 1;
    } else {
      OneHotBlock block{feature_cols[j], col.levels, offset};
      for (std::size_t i = 0; i < n; ++i) {
        const auto it = std::lower_bound(col.levels.begin(), col.levels.end(), col.raw[i]);
        ds.features(i, offset + static_cast<std::size_t>(it - col.levels.begin())) = 1.0;
      }
      for (const auto& lvl : col.levels) ds.feature_names.push_back(feature_cols[j] + "=" + lvl);
      offset += col.levels.size();
      ds.one_hot_blocks.push_back(std::move(block));
    }
  }

  for (std::size_t p = 0; p < protected_idx.size(); ++p) {
    std::vector<std::string> values;
    values.reserve(n);
    for (std::size_t i = 0; i < n; ++i) values.push_back(rows[i][protected_idx[p]]);
    ds.attributes.push_back(label_encode(schema.protected_columns[p], values));
  }
  std::vector<const ProtectedAttribute*> attrs;
  for (const auto& a : ds.attributes) attrs.push_back(&a);
  assign_product_code(ds, attrs);
  ds.validate();
  return ds;
}

std::string decode_one_hot(const TabularDataset& ds, const OneHotBlock& block,
                           std::size_t row) {
  for (std::size_t l = 0; l < block.levels.size(); ++l) {
    if (ds.features(row, block.first_feature + l) == 1.0) return block.levels[l];
  }
  throw Error(ErrorKind::kFormat, "one-hot block '" + block.column + "' has no hot entry");
}

GroupPartition partition_by_group(const TabularDataset& ds) {
  GroupPartition part;
  part.groups.resize(static_cast<std::size_t>(ds.num_groups));
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const int g = ds.group[i];
    if (g < 0 || g >= ds.num_groups) {
      throw Error(ErrorKind::kDomain, "partition: group code outside [0, K)");
    }
    part.groups[static_cast<std::size_t>(g)].push_back(i);
  }
  for (int k = 0; k < ds.num_groups; ++k) {
    if (part.groups[k].empty()) {
      const std::string name =
          k < static_cast<int>(ds.group_names.size()) ? ds.group_names[k] : std::to_string(k);
      throw Error(ErrorKind::kDegenerateGroup,
                  "partition: group " + std::to_string(k) + " ('" + name + "') is empty");
    }
  }
  return part;
}

TabularDataset cross_product_groups(const TabularDataset& ds,
                                    const std::vector<std::string>& attribute_names) {
  if (attribute_names.empty()) {
    throw Error(ErrorKind::kInvalidParameter, "cross product: no attributes named");
  }
  std::vector<const ProtectedAttribute*> attrs;
  for (const auto& name : attribute_names) {
    const auto it = std::find_if(ds.attributes.begin(), ds.attributes.end(),
                                 [&](const ProtectedAttribute& a) { return a.name == name; });
    if (it == ds.attributes.end()) {
      throw Error(ErrorKind::kSchema, "cross product: unknown protected attribute '" + name + "'");
    }
    attrs.push_back(&*it);
  }
  TabularDataset out = ds;
  assign_product_code(out, attrs);
  return out;
}

RowIndices event_subset(const TabularDataset& ds, const GroupPartition& part, int k,
                        const FairnessEvent& event) {
  if (k < 0 || k >= part.num_groups()) {
    throw Error(ErrorKind::kInvalidParameter, "event subset: group id out of range");
  }
  RowIndices out;
  for (std::size_t i : part.groups[k]) {
    if (event.matches(ds.labels[i])) out.push_back(i);
  }
  if (out.empty()) {
    throw Error(ErrorKind::kEmptyEvent, "event '" + event.name() + "' is empty for group " +
                                            std::to_string(k));
  }
  return out;
}

TabularDataset subset(const TabularDataset& ds, const RowIndices& rows) {
  TabularDataset out;
  out.features = linalg::Mat(rows.size(), ds.dim());
  out.group.reserve(rows.size());
  out.labels.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto src = ds.features.row(rows[r]);
    std::copy(src.begin(), src.end(), out.features.row(r).begin());
    out.group.push_back(ds.group[rows[r]]);
    out.labels.push_back(ds.labels[rows[r]]);
  }
  out.num_groups = ds.num_groups;
  out.group_names = ds.group_names;
  out.feature_names = ds.feature_names;
  out.one_hot_blocks = ds.one_hot_blocks;
  for (const auto& a : ds.attributes) {
    ProtectedAttribute sub{a.name, a.levels, {}};
    sub.codes.reserve(rows.size());
    for (std::size_t i : rows) sub.codes.push_back(a.codes[i]);
    out.attributes.push_back(std::move(sub));
  }
  return out;
}

TabularDataset subsample_major(const TabularDataset& ds, double rho, linalg::RngStream& rng) {
  if (!(rho >= 1.0)) throw Error(ErrorKind::kInvalidParameter, "subsample: rho must be >= 1");
  const GroupPartition part = partition_by_group(ds);
  std::size_t smallest = part.groups[0].size();
  for (const auto& g : part.groups) smallest = std::min(smallest, g.size());
  const auto target = static_cast<std::size_t>(std::floor(rho * static_cast<double>(smallest)));

  RowIndices keep;
  keep.reserve(ds.size());
  for (const auto& g : part.groups) {
    if (g.size() <= target) {
      keep.insert(keep.end(), g.begin(), g.end());
      continue;
    }
    // Partial Fisher-Yates: the first `target` slots are a uniform sample.
    RowIndices pool(g);
    for (std::size_t i = 0; i < target; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
      std::swap(pool[i], pool[pick(rng.engine())]);
    }
    keep.insert(keep.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(target));
  }
  std::sort(keep.begin(), keep.end());
  return subset(ds, keep);
}

RowIndices poisson_batch(const GroupPartition& part, int k, double q, linalg::RngStream& rng) {
  if (!(q > 0.0 && q <= 1.0)) {
    throw Error(ErrorKind::kInvalidParameter, "poisson batch: q must lie in (0, 1]");
  }
  RowIndices batch;
  for (std::size_t i : part.groups[k]) {
    if (rng.bernoulli(q)) batch.push_back(i);
  }
  return batch;
}

TrainTestSplit stratified_split(const TabularDataset& ds, double test_fraction,
                                linalg::RngStream& rng) {
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) {
    throw Error(ErrorKind::kInvalidParameter, "split: test fraction must lie in [0, 1)");
  }
  std::map<std::pair<int, int>, RowIndices> strata;
  for (std::size_t i = 0; i < ds.size(); ++i) strata[{ds.group[i], ds.labels[i]}].push_back(i);
  RowIndices train, test;
  for (auto& [key, rows] : strata) {
    std::shuffle(rows.begin(), rows.end(), rng.engine());
    const auto n_test =
        static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(rows.size())));
    test.insert(test.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_test));
    train.insert(train.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_test), rows.end());
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {subset(ds, train), subset(ds, test)};
}

}  // namespace fairdp::data
