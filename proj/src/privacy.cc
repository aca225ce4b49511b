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

#include "fairdp/privacy.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "fairdp/error.h"

namespace fairdp::privacy {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double hi = std::max(a, b), lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

// log(exp(a) - exp(b)) for a >= b.
double log_sub(double a, double b) {
  if (b == -kInf) return a;
  if (b >= a) return -kInf;
  return a + std::log1p(-std::exp(b - a));
}

double log_erfc(double x) {
  if (x < 20.0) return std::log(std::erfc(x));
  // Asymptotic expansion; erfc underflows past x ~ 26.
  const double x2 = x * x;
  const double series = 1.0 - 1.0 / (2.0 * x2) + 3.0 / (4.0 * x2 * x2) -
                        15.0 / (8.0 * x2 * x2 * x2) + 105.0 / (16.0 * x2 * x2 * x2 * x2);
  return -x2 - std::log(x) - 0.5 * std::log(std::numbers::pi) + std::log(series);
}

double log_binomial(double n, double k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// log E_{z ~ mu0}[(mu(z) / mu0(z))^alpha] for integer alpha, by binomial
// expansion of ((1 - q) + q * exp((2z - 1) / (2 sigma^2)))^alpha.
double log_a_integer(double q, double sigma, int alpha) {
  double log_a = -kInf;
  const double log_q = std::log(q), log_1mq = std::log1p(-q);
  for (int j = 0; j <= alpha; ++j) {
    const double term = log_binomial(alpha, j) + j * log_q + (alpha - j) * log_1mq +
                        (static_cast<double>(j) * j - j) / (2.0 * sigma * sigma);
    log_a = log_add(log_a, term);
  }
  return log_a;
}

// Fractional alpha: split the integral at the crossing point z0 and expand
// each half as a generalized binomial series.
double log_a_fractional(double q, double sigma, double alpha) {
  double log_a0 = -kInf, log_a1 = -kInf;
  const double z0 = sigma * sigma * std::log(1.0 / q - 1.0) + 0.5;
  const double log_q = std::log(q), log_1mq = std::log1p(-q);
  // Generalized binomial coefficient tracked as (log|c|, sign).
  double log_coef = 0.0;
  double sign = 1.0;
  for (int i = 0;; ++i) {
    if (i > 0) {
      const double factor = (alpha - (i - 1)) / i;
      if (factor == 0.0) break;
      log_coef += std::log(std::abs(factor));
      if (factor < 0.0) sign = -sign;
    }
    const double j = alpha - i;
    const double log_t0 = log_coef + i * log_q + j * log_1mq;
    const double log_t1 = log_coef + j * log_q + i * log_1mq;
    const double log_e0 = std::log(0.5) + log_erfc((i - z0) / (std::numbers::sqrt2 * sigma));
    const double log_e1 = std::log(0.5) + log_erfc((z0 - j) / (std::numbers::sqrt2 * sigma));
    const double log_s0 = log_t0 + (static_cast<double>(i) * i - i) / (2.0 * sigma * sigma) + log_e0;
    const double log_s1 = log_t1 + (j * j - j) / (2.0 * sigma * sigma) + log_e1;
    if (sign > 0.0) {
      log_a0 = log_add(log_a0, log_s0);
      log_a1 = log_add(log_a1, log_s1);
    } else {
      log_a0 = log_sub(log_a0, log_s0);
      log_a1 = log_sub(log_a1, log_s1);
    }
    if (i > alpha && std::max(log_s0, log_s1) < -30.0) break;
    if (i > 100000) break;
  }
  return log_add(log_a0, log_a1);
}

}  // namespace

Vec clip_grad(std::span<const double> g, double clip_norm) {
  Vec out(g.begin(), g.end());
  clip_grad_inplace(out, clip_norm);
  return out;
}

double clip_grad_inplace(std::span<double> g, double clip_norm) {
  if (!(clip_norm > 0.0)) throw Error(ErrorKind::kInvalidParameter, "clip: C must be > 0");
  const double norm = linalg::l2_norm(g);
  if (norm > clip_norm) linalg::scale(clip_norm / norm, g);
  return norm;
}

ClipReport clip_all(std::vector<Vec>& grads, double clip_norm) {
  ClipReport report;
  report.pre_clip_norms.reserve(grads.size());
  for (Vec& g : grads) {
    const double norm = clip_grad_inplace(g, clip_norm);
    report.pre_clip_norms.push_back(norm);
    if (norm > clip_norm) ++report.num_clipped;
  }
  return report;
}

void add_gaussian_noise(std::span<double> v, double clip_norm, double sigma,
                        linalg::RngStream& rng) {
  if (!(sigma >= 0.0)) throw Error(ErrorKind::kInvalidParameter, "noise: sigma must be >= 0");
  if (sigma == 0.0) return;
  const double std = sigma * clip_norm;
  for (double& x : v) x += std * rng.standard_normal();
}

Vec gaussian_sum_mechanism(const std::vector<Vec>& grads, std::size_t dim, double clip_norm,
                           double sigma, linalg::RngStream& rng) {
  if (!(clip_norm > 0.0)) throw Error(ErrorKind::kInvalidParameter, "mechanism: C must be > 0");
  Vec sum(dim, 0.0);
  for (const Vec& g : grads) {
    if (g.size() != dim) {
      throw Error(ErrorKind::kDimensionMismatch, "mechanism: gradient dimension");
    }
    if (linalg::l2_norm(g) > clip_norm + 1e-9) {
      throw Error(ErrorKind::kContractViolation, "mechanism: input gradient exceeds clip norm");
    }
    for (std::size_t i = 0; i < dim; ++i) sum[i] += g[i];
  }
  add_gaussian_noise(sum, clip_norm, sigma, rng);
  return sum;
}

const std::vector<double>& default_orders() {
  static const std::vector<double> orders = [] {
    std::vector<double> o;
    for (int i = 5; i <= 256; ++i) o.push_back(i * 0.25);  // 1.25 .. 64
    o.push_back(128.0);
    o.push_back(256.0);
    return o;
  }();
  return orders;
}

double subsampled_gaussian_rdp(double q, double sigma, double alpha) {
  if (!(q >= 0.0 && q <= 1.0)) throw Error(ErrorKind::kInvalidParameter, "rdp: q must lie in [0, 1]");
  if (!(alpha > 1.0)) throw Error(ErrorKind::kInvalidParameter, "rdp: order must be > 1");
  if (!(sigma >= 0.0)) throw Error(ErrorKind::kInvalidParameter, "rdp: sigma must be >= 0");
  if (q == 0.0) return 0.0;
  if (sigma == 0.0) return kInf;
  if (q == 1.0) return alpha / (2.0 * sigma * sigma);
  const double log_a = alpha == std::floor(alpha)
                           ? log_a_integer(q, sigma, static_cast<int>(alpha))
                           : log_a_fractional(q, sigma, alpha);
  return std::max(0.0, log_a / (alpha - 1.0));
}

PrivacyLedger PrivacyLedger::Create(double q, double sigma, double delta,
                                    std::vector<double> orders) {
  if (!(q > 0.0 && q <= 1.0)) throw Error(ErrorKind::kInvalidParameter, "ledger: q must lie in (0, 1]");
  if (!(sigma >= 0.0)) throw Error(ErrorKind::kInvalidParameter, "ledger: sigma must be >= 0");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw Error(ErrorKind::kInvalidParameter, "ledger: delta must lie in (0, 1)");
  }
  PrivacyLedger l;
  l.q = q;
  l.sigma = sigma;
  l.delta = delta;
  l.orders = std::move(orders);
  l.rdp.assign(l.orders.size(), 0.0);
  l.step_rdp.reserve(l.orders.size());
  for (double alpha : l.orders) l.step_rdp.push_back(subsampled_gaussian_rdp(q, sigma, alpha));
  return l;
}

void PrivacyLedger::record_steps(long count) {
  if (count < 0) throw Error(ErrorKind::kInvalidParameter, "ledger: negative step count");
  steps += count;
  for (std::size_t i = 0; i < orders.size(); ++i) {
    rdp[i] = static_cast<double>(steps) * step_rdp[i];
  }
}

double account(const PrivacyLedger& ledger) {
  if (ledger.steps == 0) return 0.0;
  double best = kInf;
  for (std::size_t i = 0; i < ledger.orders.size(); ++i) {
    const double alpha = ledger.orders[i];
    const double eps = ledger.rdp[i] + std::log(1.0 / ledger.delta) / (alpha - 1.0);
    best = std::min(best, eps);
  }
  return best;
}

double account(double q, double sigma, long steps, double delta) {
  PrivacyLedger l = PrivacyLedger::Create(q, sigma, delta);
  l.record_steps(steps);
  return account(l);
}

double parallel_compose(const std::vector<PrivacyLedger>& ledgers) {
  double eps = 0.0;
  for (const auto& l : ledgers) eps = std::max(eps, account(l));
  return eps;
}

double calibrate_sigma(double target_epsilon, double q, long steps, double delta) {
  if (!(target_epsilon > 0.0)) {
    throw Error(ErrorKind::kInvalidParameter, "calibrate: target epsilon must be > 0");
  }
  if (steps <= 0) throw Error(ErrorKind::kInvalidParameter, "calibrate: steps must be >= 1");
  constexpr double kMaxSigma = 1e4;
  double hi = kMaxSigma;
  double eps_hi = account(q, hi, steps, delta);
  if (eps_hi > target_epsilon) {
    throw Error(ErrorKind::kCalibration, "calibrate: target epsilon unreachable with sigma <= 1e4");
  }
  if (eps_hi >= 0.99 * target_epsilon) return hi;
  double lo = 1e-3;
  if (account(q, lo, steps, delta) <= target_epsilon) {
    throw Error(ErrorKind::kCalibration, "calibrate: target epsilon too large to bracket");
  }
  // Invariant: eps(lo) > target >= eps(hi).
  for (int iter = 0; iter < 400; ++iter) {
    const double mid = std::sqrt(lo * hi);
    const double eps_mid = account(q, mid, steps, delta);
    if (eps_mid > target_epsilon) {
      lo = mid;
    } else {
      hi = mid;
      eps_hi = eps_mid;
      if (eps_hi >= 0.99 * target_epsilon) return hi;
    }
  }
  throw Error(ErrorKind::kCalibration, "calibrate: bisection did not converge");
}

nlohmann::json to_json(const PrivacyLedger& ledger) {
  const double eps = account(ledger);
  nlohmann::json eps_json = std::isfinite(eps) ? nlohmann::json(eps) : nlohmann::json("inf");
  return {{"q", ledger.q},           {"sigma", ledger.sigma}, {"steps", ledger.steps},
          {"delta", ledger.delta},   {"epsilon", eps_json},   {"orders", ledger.orders},
          {"rdp", ledger.rdp}};
}

}  // namespace fairdp::privacy
