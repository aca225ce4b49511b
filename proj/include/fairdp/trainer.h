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

// Group-partitioned DP-SGD with last-layer weight clipping.
//
// Each round clips W_L to norm M, hands a copy of the shared parameters to
// every protected group, lets each group take one noisy clipped-gradient step
// on its own Poisson batch, and averages the K results back into the shared
// parameters. The DPSGD baseline is the same loop with a single group and no
// weight clipping.
//
// Randomness is keyed by group id, never by processing order: group k draws
// its batches from stream (kBatchSite, k) and its noise from (kNoiseSite, k).

#ifndef FAIRDP_TRAINER_H_
#define FAIRDP_TRAINER_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "fairdp/data.h"
#include "fairdp/model.h"
#include "fairdp/privacy.h"

namespace fairdp::training {

using linalg::Vec;
using model::ModelParams;

struct TrainConfig {
  double q = 0.01;
  double eta_adam = 0.02;
  double eta_sgd = 0.005;
  double sigma = 1.0;
  double clip_c = 1.0;
  // Last-layer weight bound; +inf disables the clip.
  double clip_m = 1.0;
  long steps = 100;
  double delta = 1e-5;
  // Rounds t <= floor(switch_fraction * steps) use Adam, the rest SGD.
  double switch_fraction = 0.9;
  std::uint64_t seed = 0;
  std::vector<std::size_t> hidden_dims{32};
  double threshold = 0.5;

  void validate() const;
  long adam_rounds() const;
};

enum StreamSite : std::uint64_t {
  kInitSite = 1,
  kBatchSite = 2,
  kNoiseSite = 3,
};

std::uint64_t stream_id(StreamSite site, std::uint64_t index = 0);

struct RoundRecord {
  long round = 0;  // 1-based
  model::OptimizerMode mode = model::OptimizerMode::kSgd;
  double learning_rate = 0.0;
  // Last-layer slice of each group's clipped gradient sum.
  std::vector<Vec> group_mu;
  // (1/K) sum_k group_mu[k].
  Vec mu;
  // Aggregated W_L right after the weight clip, i.e. the anchor of this
  // round's update.
  Vec w_prev;
  std::vector<std::size_t> batch_sizes;
  std::size_t batch_total = 0;
  // Mean per-example loss over all batches (diagnostic only).
  double loss = 0.0;
};

struct TrainResult {
  ModelParams params;
  std::vector<RoundRecord> rounds;
  privacy::PrivacyLedger ledger;
  double epsilon = 0.0;
  int num_groups = 0;
};

struct GroupGradient {
  Vec clipped_sum;
  std::size_t batch_size = 0;
  std::size_t num_clipped = 0;
  double loss_sum = 0.0;
};

// Sum of per-example gradients clipped to C over `batch`.
GroupGradient clipped_gradient_sum(const ModelParams& params, const data::TabularDataset& ds,
                                   const data::RowIndices& batch, double clip_c,
                                   model::GradWorkspace& ws);

// One group's noisy update: copy `base`, add N(0, (sigma C)^2 I) to the
// clipped sum and apply the optimizer.
ModelParams noisy_group_update(const ModelParams& base, const GroupGradient& grad, double sigma,
                               double clip_c, model::OptimizerState& opt,
                               linalg::RngStream& noise_rng);

// Coordinate-wise mean of K parameter sets.
ModelParams aggregate(const std::vector<ModelParams>& group_params);

model::OptimizerMode mode_for_round(const TrainConfig& cfg, long round);

// Called after every round with the record and the aggregated parameters.
using RoundObserver = std::function<void(const RoundRecord&, const ModelParams&)>;

struct TrainOptions {
  RoundObserver observer;
  // Order in which groups are processed within a round; empty means 0..K-1.
  // The result does not depend on it.
  std::vector<int> group_order;
};

TrainResult train(const data::TabularDataset& ds, const data::GroupPartition& part,
                  const TrainConfig& cfg, const TrainOptions& options = {});

// Standard DP-SGD over the undivided dataset: one group, M = +inf.
TrainResult train_dpsgd_baseline(const data::TabularDataset& ds, const TrainConfig& cfg,
                                 const TrainOptions& options = {});

}  // namespace fairdp::training

#endif  // FAIRDP_TRAINER_H_
