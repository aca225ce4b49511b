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

// Functional-mechanism logistic regression over protected groups.
//
// Each group's mean logistic loss is replaced by its second-order Taylor
// expansion at theta = 0,
//
//   L_k(theta) = theta' L2 theta + theta' L1 + L0,
//   L2 = mean(x x') / 8,  L1 = mean((1/2 - y) x),  L0 = log 2,
//
// whose coefficients receive Laplace(Delta / epsilon) noise once, with
// Delta = d^2 / 4 + 3 d. Training then only sees the noisy coefficients.

#ifndef FAIRDP_FAIRFM_H_
#define FAIRDP_FAIRFM_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fairdp/data.h"
#include "fairdp/model.h"
#include "json.hpp"

namespace fairdp::fm {

using linalg::Mat;
using linalg::Vec;

struct PolyObjective {
  Mat lambda2;
  Vec lambda1;
  double lambda0 = 0.0;

  std::size_t dim() const { return lambda1.size(); }
  double value(std::span<const double> theta) const;
  // 2 L2 theta + L1; the true gradient when L2 is symmetric.
  Vec gradient(std::span<const double> theta) const;
};

PolyObjective taylor_coefficients(const data::TabularDataset& ds, const data::RowIndices& rows);

double sensitivity(std::size_t dim);

PolyObjective perturb(const PolyObjective& obj, double epsilon, std::size_t dim,
                      linalg::RngStream& rng);

// Gradient descent on the objectives with per-round averaging across groups.
// Returns a bias-free single-layer model.
model::ModelParams train_on_objectives(const std::vector<PolyObjective>& objectives, double eta,
                                       long steps, linalg::RngStream& init_rng);

enum StreamSite : std::uint64_t {
  kFmInitSite = 20,
  kFmNoiseSite = 21,
};

model::ModelParams train_fairfm(const data::TabularDataset& ds, const data::GroupPartition& part,
                                double epsilon, double eta, long steps, std::uint64_t seed);

nlohmann::json to_json(const PolyObjective& obj);

}  // namespace fairdp::fm

#endif  // FAIRDP_FAIRFM_H_
