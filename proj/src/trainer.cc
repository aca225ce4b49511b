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

#include "fairdp/trainer.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fairdp/error.h"

namespace fairdp::training {

void TrainConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::kInvalidParameter, msg); };
  if (!(q > 0.0 && q <= 1.0)) fail("config: q must lie in (0, 1]");
  if (!(clip_c > 0.0)) fail("config: C must be > 0");
  if (!(clip_m > 0.0)) fail("config: M must be > 0");
  if (steps < 1) fail("config: T must be >= 1");
  if (!(sigma >= 0.0)) fail("config: sigma must be >= 0");
  if (!(eta_adam > 0.0) || !(eta_sgd > 0.0)) fail("config: learning rates must be > 0");
  if (!(delta > 0.0 && delta < 1.0)) fail("config: delta must lie in (0, 1)");
  if (!(switch_fraction >= 0.0 && switch_fraction <= 1.0)) {
    fail("config: switch fraction must lie in [0, 1]");
  }
  if (!(threshold > 0.0 && threshold < 1.0)) fail("config: threshold must lie in (0, 1)");
}

long TrainConfig::adam_rounds() const {
  return static_cast<long>(std::floor(switch_fraction * static_cast<double>(steps)));
}

std::uint64_t stream_id(StreamSite site, std::uint64_t index) {
  return (static_cast<std::uint64_t>(site) << 32) | index;
}

GroupGradient clipped_gradient_sum(const ModelParams& params, const data::TabularDataset& ds,
                                   const data::RowIndices& batch, double clip_c,
                                   model::GradWorkspace& ws) {
  GroupGradient out;
  out.clipped_sum.assign(params.size(), 0.0);
  out.batch_size = batch.size();
  Vec g(params.size());
  for (std::size_t i : batch) {
    out.loss_sum += model::per_example_grad(params, ds.features.row(i), ds.labels[i], g, ws);
    const double norm = privacy::clip_grad_inplace(g, clip_c);
    if (norm > clip_c) ++out.num_clipped;
    for (std::size_t p = 0; p < g.size(); ++p) out.clipped_sum[p] += g[p];
  }
  return out;
}

ModelParams noisy_group_update(const ModelParams& base, const GroupGradient& grad, double sigma,
                               double clip_c, model::OptimizerState& opt,
                               linalg::RngStream& noise_rng) {
  Vec noisy = grad.clipped_sum;
  privacy::add_gaussian_noise(noisy, clip_c, sigma, noise_rng);
  ModelParams out = base;
  model::step(out, opt, noisy);
  return out;
}

ModelParams aggregate(const std::vector<ModelParams>& group_params) {
  if (group_params.empty()) {
    throw Error(ErrorKind::kInvalidParameter, "aggregate: no parameter sets");
  }
  ModelParams out = group_params.front();
  for (std::size_t k = 1; k < group_params.size(); ++k) {
    if (group_params[k].layer_dims() != out.layer_dims()) {
      throw Error(ErrorKind::kDimensionMismatch, "aggregate: parameter shapes differ");
    }
  }
  auto acc = out.values();
  for (std::size_t p = 0; p < acc.size(); ++p) {
    double s = 0.0;
    for (const auto& gp : group_params) s += gp.values()[p];
    acc[p] = s / static_cast<double>(group_params.size());
  }
  return out;
}

model::OptimizerMode mode_for_round(const TrainConfig& cfg, long round) {
  return round <= cfg.adam_rounds() ? model::OptimizerMode::kAdam : model::OptimizerMode::kSgd;
}

TrainResult train(const data::TabularDataset& ds, const data::GroupPartition& part,
                  const TrainConfig& cfg, const TrainOptions& options) {
  cfg.validate();
  const int num_groups = part.num_groups();
  if (num_groups < 1) throw Error(ErrorKind::kInvalidParameter, "train: empty partition");
  for (const auto& g : part.groups) {
    if (g.empty()) throw Error(ErrorKind::kDegenerateGroup, "train: empty group in partition");
  }

  linalg::RngStream init_rng(cfg.seed, stream_id(kInitSite));
  ModelParams theta = model::init_params(ds.dim(), cfg.hidden_dims, init_rng);

  std::vector<linalg::RngStream> batch_rng, noise_rng;
  std::vector<model::OptimizerState> opts;
  for (int k = 0; k < num_groups; ++k) {
    batch_rng.emplace_back(cfg.seed, stream_id(kBatchSite, k));
    noise_rng.emplace_back(cfg.seed, stream_id(kNoiseSite, k));
    opts.push_back(cfg.adam_rounds() > 0 ? model::OptimizerState::Adam(cfg.eta_adam)
                                         : model::OptimizerState::Sgd(cfg.eta_sgd));
  }

  std::vector<int> order = options.group_order;
  if (order.empty()) {
    order.resize(static_cast<std::size_t>(num_groups));
    std::iota(order.begin(), order.end(), 0);
  }
  {
    std::vector<int> sorted(order);
    std::sort(sorted.begin(), sorted.end());
    for (int k = 0; k < num_groups; ++k) {
      if (sorted.size() != static_cast<std::size_t>(num_groups) || sorted[k] != k) {
        throw Error(ErrorKind::kInvalidParameter, "train: group order is not a permutation");
      }
    }
  }

  TrainResult result;
  result.num_groups = num_groups;
  result.ledger = privacy::PrivacyLedger::Create(cfg.q, cfg.sigma, cfg.delta);
  result.rounds.reserve(static_cast<std::size_t>(cfg.steps));
  model::GradWorkspace ws;
  const std::size_t f = theta.penultimate_dim();

  for (long t = 1; t <= cfg.steps; ++t) {
    const model::OptimizerMode mode = mode_for_round(cfg, t);
    if (mode == model::OptimizerMode::kSgd) {
      for (auto& opt : opts) {
        if (opt.mode != model::OptimizerMode::kSgd) opt.switch_to_sgd(cfg.eta_sgd);
      }
    }
    if (std::isfinite(cfg.clip_m)) model::clip_last_layer(theta, cfg.clip_m);

    RoundRecord rec;
    rec.round = t;
    rec.mode = mode;
    rec.learning_rate = opts.front().learning_rate;
    rec.w_prev.assign(theta.last_layer().begin(), theta.last_layer().end());
    rec.mu.assign(f, 0.0);
    double loss_sum = 0.0;

    std::vector<ModelParams> group_params(static_cast<std::size_t>(num_groups));
    rec.group_mu.resize(static_cast<std::size_t>(num_groups));
    rec.batch_sizes.resize(static_cast<std::size_t>(num_groups));
    std::vector<double> group_loss(static_cast<std::size_t>(num_groups), 0.0);
    for (int k : order) {
      const data::RowIndices batch = data::poisson_batch(part, k, cfg.q, batch_rng[k]);
      const GroupGradient grad = clipped_gradient_sum(theta, ds, batch, cfg.clip_c, ws);
      group_params[k] =
          noisy_group_update(theta, grad, cfg.sigma, cfg.clip_c, opts[k], noise_rng[k]);

      const auto slice = model::last_layer_slice(theta, grad.clipped_sum);
      rec.group_mu[k].assign(slice.begin(), slice.end());
      rec.batch_sizes[k] = grad.batch_size;
      group_loss[k] = grad.loss_sum;
    }
    for (int k = 0; k < num_groups; ++k) {
      rec.batch_total += rec.batch_sizes[k];
      loss_sum += group_loss[k];
      linalg::axpy(1.0, rec.group_mu[k], rec.mu);
    }
    linalg::scale(1.0 / static_cast<double>(num_groups), rec.mu);
    rec.loss = rec.batch_total > 0 ? loss_sum / static_cast<double>(rec.batch_total) : 0.0;

    theta = aggregate(group_params);
    if (!linalg::all_finite(theta.values())) {
      throw Error(ErrorKind::kNumerical,
                  "train: non-finite parameters after round " + std::to_string(t) +
                      " (mode " + model::OptimizerModeName(mode) + ", lr " +
                      std::to_string(rec.learning_rate) + ", batch " +
                      std::to_string(rec.batch_total) + ")");
    }
    result.ledger.record_steps(1);
    if (options.observer) options.observer(rec, theta);
    result.rounds.push_back(std::move(rec));
  }

  result.params = std::move(theta);
  // Groups are disjoint and share (q, sigma, T), so every group's ledger is
  // identical and parallel composition reduces to any one of them.
  result.epsilon = privacy::parallel_compose(
      std::vector<privacy::PrivacyLedger>(static_cast<std::size_t>(num_groups), result.ledger));
  return result;
}

TrainResult train_dpsgd_baseline(const data::TabularDataset& ds, const TrainConfig& cfg,
                                 const TrainOptions& options) {
  data::GroupPartition single;
  single.groups.emplace_back(ds.size());
  std::iota(single.groups[0].begin(), single.groups[0].end(), std::size_t{0});
  TrainConfig baseline = cfg;
  baseline.clip_m = std::numeric_limits<double>::infinity();
  return train(ds, single, baseline, options);
}

}  // namespace fairdp::training
