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

#include "fairdp/certify.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fairdp/error.h"

namespace fairdp::certify {
namespace {

double logit_cutoff(double threshold) { return std::log(threshold / (1.0 - threshold)); }

void require_finite_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw Error(ErrorKind::kInvalidParameter, std::string("certificate: ") + what +
                                                  " must be finite and > 0");
  }
}

}  // namespace

CertContext CertContext::FromRound(const training::RoundRecord& rec,
                                   const training::TrainConfig& cfg, int num_groups) {
  if (rec.mode != model::OptimizerMode::kSgd) {
    throw Error(ErrorKind::kInvalidParameter,
                "certificate: round " + std::to_string(rec.round) + " is not an SGD round");
  }
  CertContext ctx;
  ctx.w_prev = rec.w_prev;
  ctx.mu = rec.mu;
  ctx.eta = rec.learning_rate;
  ctx.sigma = cfg.sigma;
  ctx.clip_c = cfg.clip_c;
  ctx.num_groups = num_groups;
  ctx.threshold = cfg.threshold;
  ctx.round = rec.round;
  ctx.batch_total = rec.batch_total;
  ctx.clip_m = cfg.clip_m;
  return ctx;
}

Vec CertContext::center() const {
  Vec c = w_prev;
  linalg::axpy(-eta, mu, c);
  return c;
}

double CertContext::noise_scale() const {
  return eta * sigma * clip_c / std::sqrt(static_cast<double>(num_groups));
}

CertContext last_sgd_context(const training::TrainResult& run,
                             const training::TrainConfig& cfg) {
  for (auto it = run.rounds.rbegin(); it != run.rounds.rend(); ++it) {
    if (it->mode == model::OptimizerMode::kSgd) {
      return CertContext::FromRound(*it, cfg, run.num_groups);
    }
  }
  throw Error(ErrorKind::kInvalidParameter,
              "certificate: run has no SGD rounds (switch fraction is 1)");
}

double pred_prob(const CertContext& ctx, std::span<const double> z_prev) {
  const Vec center = ctx.center();
  const double mean = linalg::inner(center, z_prev);
  const double cutoff = logit_cutoff(ctx.threshold);
  const double z_norm = linalg::l2_norm(z_prev);
  if (z_norm == 0.0) {
    // z_L is exactly 0 here.
    if (cutoff == 0.0) return 0.5;
    return 0.0 > cutoff ? 1.0 : 0.0;
  }
  const double sd = z_norm * ctx.noise_scale();
  if (sd == 0.0) {
    if (mean == cutoff) return 0.5;
    return mean > cutoff ? 1.0 : 0.0;
  }
  return 0.5 + 0.5 * linalg::erf((mean - cutoff) / (sd * std::numbers::sqrt2));
}

double norm_bound(const CertContext& ctx) {
  const double center_norm = linalg::l2_norm(ctx.center());
  if (center_norm == 0.0) return 0.0;
  const double scale = ctx.noise_scale();
  if (scale == 0.0) return 1.0;
  return linalg::erf(center_norm / (scale * std::numbers::sqrt2));
}

ProbabilityBand prob_sandwich(const CertContext& ctx, std::span<const double> z_prev) {
  if (z_prev.size() != ctx.w_prev.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "prob_sandwich: activation dimension");
  }
  if (ctx.threshold != 0.5) {
    throw Error(ErrorKind::kInvalidParameter,
                "prob_sandwich: the band is only defined for threshold 0.5");
  }
  const double half = 0.5 * norm_bound(ctx);
  return {0.5 - half, 0.5 + half};
}

double theorem2_bound(double clip_m, int num_groups, double eta, std::size_t batch_total,
                      double clip_c, double sigma) {
  require_finite_positive(clip_m, "M");
  require_finite_positive(eta, "eta");
  require_finite_positive(clip_c, "C");
  require_finite_positive(sigma, "sigma");
  if (num_groups < 1) throw Error(ErrorKind::kInvalidParameter, "certificate: K must be >= 1");
  const double k = num_groups;
  const double m = static_cast<double>(batch_total);
  const double arg = (clip_m * k + eta * m * clip_c) * std::sqrt(k) /
                     (k * eta * sigma * clip_c * std::numbers::sqrt2);
  return linalg::erf(arg);
}

double group_positive_rate(const CertContext& ctx, const model::ModelParams& model,
                           const data::TabularDataset& ds, const data::RowIndices& rows) {
  if (rows.empty()) throw Error(ErrorKind::kEmptyEvent, "certificate: empty row set");
  if (model.penultimate_dim() != ctx.w_prev.size()) {
    throw Error(ErrorKind::kMismatch, "certificate: model and context disagree on W_L size");
  }
  double sum = 0.0;
  for (std::size_t i : rows) {
    sum += pred_prob(ctx, model::penultimate(model, ds.features.row(i)));
  }
  return sum / static_cast<double>(rows.size());
}

namespace {

struct EventRates {
  std::vector<double> rates;
  double gap = 0.0;
};

EventRates rates_for_event(const CertContext& ctx, const data::TabularDataset& ds,
                           const data::GroupPartition& part, const data::FairnessEvent& event,
                           const model::ModelParams& model) {
  EventRates out;
  // Averages can land a few ulps outside the analytic band; clamp into it so
  // the gap never exceeds its width.
  const bool banded = ctx.threshold == 0.5;
  const double half = banded ? 0.5 * norm_bound(ctx) : 0.5;
  for (int k = 0; k < part.num_groups(); ++k) {
    const data::RowIndices rows = data::event_subset(ds, part, k, event);
    const double p = group_positive_rate(ctx, model, ds, rows);
    out.rates.push_back(std::clamp(p, 0.5 - half, 0.5 + half));
  }
  const auto [lo, hi] = std::minmax_element(out.rates.begin(), out.rates.end());
  out.gap = std::min(*hi - *lo, banded ? 2.0 * half : 1.0);
  return out;
}

FairnessCertificate base_certificate(const CertContext& ctx) {
  FairnessCertificate cert;
  cert.clip_m = ctx.clip_m;
  cert.num_groups = ctx.num_groups;
  cert.eta = ctx.eta;
  cert.batch_total = ctx.batch_total;
  cert.clip_c = ctx.clip_c;
  cert.sigma = ctx.sigma;
  cert.round = ctx.round;
  cert.tau_norm = norm_bound(ctx);
  const bool bounded = std::isfinite(ctx.clip_m) && ctx.sigma > 0.0;
  cert.tau_theoretical = bounded ? theorem2_bound(ctx.clip_m, ctx.num_groups, ctx.eta,
                                                  ctx.batch_total, ctx.clip_c, ctx.sigma)
                                 : 1.0;
  return cert;
}

}  // namespace

FairnessCertificate empirical_certificate(const CertContext& ctx,
                                          const data::TabularDataset& ds,
                                          const data::GroupPartition& part,
                                          const data::FairnessEvent& event,
                                          const model::ModelParams& model) {
  FairnessCertificate cert = base_certificate(ctx);
  cert.event = event.name();
  const EventRates r = rates_for_event(ctx, ds, part, event, model);
  for (std::size_t k = 0; k < r.rates.size(); ++k) cert.per_group_p_emp[std::to_string(k)] = r.rates[k];
  cert.tau_empirical = r.gap;
  return cert;
}

FairnessCertificate certify(const CertContext& ctx, const data::TabularDataset& ds,
                            const data::GroupPartition& part, metrics::FairnessMetric metric,
                            const model::ModelParams& model) {
  switch (metric) {
    case metrics::FairnessMetric::kDemographicParity:
      return empirical_certificate(ctx, ds, part, data::FairnessEvent::None(), model);
    case metrics::FairnessMetric::kEqualOpportunity:
      return empirical_certificate(ctx, ds, part, data::FairnessEvent::PositiveLabel(), model);
    case metrics::FairnessMetric::kEqualOdds:
      break;
  }
  FairnessCertificate cert = base_certificate(ctx);
  cert.event = "equal-odds";
  for (int y : {0, 1}) {
    const auto event = data::FairnessEvent::LabelEquals(y);
    const EventRates r = rates_for_event(ctx, ds, part, event, model);
    for (std::size_t k = 0; k < r.rates.size(); ++k) {
      cert.per_group_p_emp[std::to_string(k) + "|" + event.name()] = r.rates[k];
    }
    cert.tau_empirical = std::max(cert.tau_empirical, r.gap);
  }
  return cert;
}

nlohmann::json to_json(const FairnessCertificate& cert) {
  nlohmann::json per_group = nlohmann::json::object();
  for (const auto& [k, p] : cert.per_group_p_emp) per_group[k] = p;
  return {{"tau_theoretical", cert.tau_theoretical},
          {"tau_norm", cert.tau_norm},
          {"tau_empirical", cert.tau_empirical},
          {"event", cert.event},
          {"per_group", per_group},
          {"context",
           {{"M", cert.clip_m},
            {"K", cert.num_groups},
            {"eta", cert.eta},
            {"m", cert.batch_total},
            {"C", cert.clip_c},
            {"sigma", cert.sigma},
            {"round", cert.round}}}};
}

SmoothedClassifier::SmoothedClassifier(const model::ModelParams& model, double sigma_bar,
                                       std::size_t n_samples, linalg::RngStream& rng) {
  if (!(sigma_bar > 0.0)) throw Error(ErrorKind::kInvalidParameter, "smoothing: sigma_bar must be > 0");
  if (n_samples < 1) throw Error(ErrorKind::kInvalidParameter, "smoothing: need >= 1 sample");
  samples_.reserve(n_samples);
  for (std::size_t s = 0; s < n_samples; ++s) {
    model::ModelParams p = model;
    for (double& v : p.values()) v += sigma_bar * rng.standard_normal();
    samples_.push_back(std::move(p));
  }
}

double SmoothedClassifier::probability(std::span<const double> x) const {
  double sum = 0.0;
  for (const auto& p : samples_) sum += linalg::sigmoid(model::predict_logit(p, x));
  return sum / static_cast<double>(samples_.size());
}

std::vector<double> SmoothedClassifier::probabilities(const data::TabularDataset& ds) const {
  std::vector<double> out(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) out[i] = probability(ds.features.row(i));
  return out;
}

double smooth_inference(const model::ModelParams& model, double sigma_bar, std::size_t n_samples,
                        linalg::RngStream& rng, std::span<const double> x) {
  return SmoothedClassifier(model, sigma_bar, n_samples, rng).probability(x);
}

}  // namespace fairdp::certify
