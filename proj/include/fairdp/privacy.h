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

// Per-example clipping, the Gaussian sum mechanism, and a Renyi-DP accountant
// for the Poisson-subsampled Gaussian mechanism.

#ifndef FAIRDP_PRIVACY_H_
#define FAIRDP_PRIVACY_H_

#include <cstddef>
#include <span>
#include <vector>

#include "fairdp/linalg.h"
#include "json.hpp"

namespace fairdp::privacy {

using linalg::Vec;

// g * min(1, C / ||g||). The zero vector is returned unchanged.
Vec clip_grad(std::span<const double> g, double clip_norm);
// In-place variant; returns the pre-clip norm.
double clip_grad_inplace(std::span<double> g, double clip_norm);

struct ClipReport {
  std::vector<double> pre_clip_norms;
  std::size_t num_clipped = 0;
};

// Clips every gradient in place and reports what happened.
ClipReport clip_all(std::vector<Vec>& grads, double clip_norm);

// sum(grads) + N(0, (sigma * C)^2 I). `dim` fixes the output size so an empty
// batch still yields a pure-noise vector. Inputs must already be clipped to C.
Vec gaussian_sum_mechanism(const std::vector<Vec>& grads, std::size_t dim, double clip_norm,
                           double sigma, linalg::RngStream& rng);

// Adds N(0, (sigma * C)^2) to every coordinate. sigma = 0 leaves v untouched.
void add_gaussian_noise(std::span<double> v, double clip_norm, double sigma,
                        linalg::RngStream& rng);

// The default order grid {1.25, 1.5, ..., 64} U {128, 256}.
const std::vector<double>& default_orders();

// RDP of one step of the Poisson-subsampled Gaussian mechanism at order alpha
// (sensitivity 1, noise multiplier sigma).
double subsampled_gaussian_rdp(double q, double sigma, double alpha);

struct PrivacyLedger {
  double q = 0.0;
  double sigma = 0.0;
  long steps = 0;
  double delta = 1e-5;
  std::vector<double> orders;
  // Accumulated RDP at each order; equals steps * step_rdp.
  std::vector<double> rdp;
  std::vector<double> step_rdp;

  static PrivacyLedger Create(double q, double sigma, double delta,
                              std::vector<double> orders = default_orders());

  void record_steps(long count);
};

// min over orders of rdp + log(1/delta) / (alpha - 1). +inf when sigma = 0 and
// q > 0 with at least one step.
double account(const PrivacyLedger& ledger);

double account(double q, double sigma, long steps, double delta);

// Worst case over disjoint partitions.
double parallel_compose(const std::vector<PrivacyLedger>& ledgers);

// Smallest-found sigma whose epsilon lies in [0.99 * target, target].
double calibrate_sigma(double target_epsilon, double q, long steps, double delta);

nlohmann::json to_json(const PrivacyLedger& ledger);

}  // namespace fairdp::privacy

#endif  // FAIRDP_PRIVACY_H_
