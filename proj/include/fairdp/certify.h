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

// Fairness certificates for models trained with group-partitioned DP-SGD.
//
// After an SGD round the output weights are Gaussian:
//
//   W_L ~ N(w_prev - eta * mu, (eta sigma C)^2 / K * I)
//
// so for a fixed penultimate activation z the logit <W_L, z> is a scalar
// Gaussian and Pr(y_hat = 1 | x) has a closed form through erf. Averaging
// that probability over a group gives its certified positive rate; the
// largest pairwise difference is the empirical certificate tau_emp.
// Cauchy-Schwarz on <w_prev - eta mu, z> yields an input-independent band
// around 1/2, and bounding ||w_prev|| by M and ||mu|| by m C / K yields the
// worst-case certificate.

#ifndef FAIRDP_CERTIFY_H_
#define FAIRDP_CERTIFY_H_

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fairdp/data.h"
#include "fairdp/metrics.h"
#include "fairdp/model.h"
#include "fairdp/trainer.h"
#include "json.hpp"

namespace fairdp::certify {

using linalg::Vec;

struct CertContext {
  Vec w_prev;
  Vec mu;
  double eta = 0.0;
  double sigma = 0.0;
  double clip_c = 1.0;
  int num_groups = 1;
  // Decision threshold on the sigmoid output.
  double threshold = 0.5;

  // Provenance, carried into the certificate.
  long round = 0;
  std::size_t batch_total = 0;
  double clip_m = 0.0;

  // Throws unless the record comes from an SGD round.
  static CertContext FromRound(const training::RoundRecord& rec,
                               const training::TrainConfig& cfg, int num_groups);

  // w_prev - eta * mu
  Vec center() const;
  // Standard deviation of <W_L, z> per unit ||z||.
  double noise_scale() const;
};

// The last SGD round of a run. Throws if the run has none.
CertContext last_sgd_context(const training::TrainResult& run,
                             const training::TrainConfig& cfg);

// Pr(y_hat = 1 | z_prev) under the last-layer noise.
double pred_prob(const CertContext& ctx, std::span<const double> z_prev);

struct ProbabilityBand {
  double lower = 0.5;
  double upper = 0.5;
};

// Bounds pred_prob(ctx, z) for every z of the given dimension.
ProbabilityBand prob_sandwich(const CertContext& ctx, std::span<const double> z_prev);

// erf(||w_prev - eta mu|| sqrt(K) / (eta sigma C sqrt 2)).
double norm_bound(const CertContext& ctx);

// erf((M K + eta m C) sqrt(K) / (K eta sigma C sqrt 2)).
double theorem2_bound(double clip_m, int num_groups, double eta, std::size_t batch_total,
                      double clip_c, double sigma);

struct FairnessCertificate {
  double tau_theoretical = 1.0;
  // erf of the measured band half-width; sits between the two taus.
  double tau_norm = 1.0;
  double tau_empirical = 0.0;
  std::string event;
  // Keyed by group id, or "<group>|<event>" for equal odds.
  std::map<std::string, double> per_group_p_emp;

  double clip_m = 0.0;
  int num_groups = 1;
  double eta = 0.0;
  std::size_t batch_total = 0;
  double clip_c = 1.0;
  double sigma = 0.0;
  long round = 0;
};

// Mean pred_prob over D_{k,e} for one group.
double group_positive_rate(const CertContext& ctx, const model::ModelParams& model,
                           const data::TabularDataset& ds, const data::RowIndices& rows);

// Certified per-group positive rates for one conditioning event and their
// largest pairwise gap.
FairnessCertificate empirical_certificate(const CertContext& ctx,
                                          const data::TabularDataset& ds,
                                          const data::GroupPartition& part,
                                          const data::FairnessEvent& event,
                                          const model::ModelParams& model);

// Demographic parity (event none), equal opportunity (y = 1) or equal odds
// (max over y = 0 and y = 1).
FairnessCertificate certify(const CertContext& ctx, const data::TabularDataset& ds,
                            const data::GroupPartition& part, metrics::FairnessMetric metric,
                            const model::ModelParams& model);

nlohmann::json to_json(const FairnessCertificate& cert);

// Monte-Carlo smoothed classifier: the average sigmoid output over n_samples
// copies of the model with N(0, sigma_bar^2) added to every parameter. The
// perturbations are drawn once at construction.
class SmoothedClassifier {
 public:
  SmoothedClassifier(const model::ModelParams& model, double sigma_bar, std::size_t n_samples,
                     linalg::RngStream& rng);

  double probability(std::span<const double> x) const;
  std::vector<double> probabilities(const data::TabularDataset& ds) const;

 private:
  std::vector<model::ModelParams> samples_;
};

double smooth_inference(const model::ModelParams& model, double sigma_bar, std::size_t n_samples,
                        linalg::RngStream& rng, std::span<const double> x);

}  // namespace fairdp::certify

#endif  // FAIRDP_CERTIFY_H_
