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

#include "fairdp/fairfm.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fairdp/error.h"

namespace fairdp::fm {

double PolyObjective::value(std::span<const double> theta) const {
  const Vec l2_theta = linalg::matvec(lambda2, theta);
  return linalg::inner(theta, l2_theta) + linalg::inner(theta, lambda1) + lambda0;
}

Vec PolyObjective::gradient(std::span<const double> theta) const {
  Vec g = linalg::matvec(lambda2, theta);
  linalg::scale(2.0, g);
  linalg::axpy(1.0, lambda1, g);
  return g;
}

PolyObjective taylor_coefficients(const data::TabularDataset& ds, const data::RowIndices& rows) {
  if (rows.empty()) throw Error(ErrorKind::kDegenerateGroup, "fm: empty group");
  const std::size_t d = ds.dim();
  PolyObjective obj{Mat(d, d), Vec(d, 0.0), std::numbers::ln2};
  for (std::size_t i : rows) {
    const auto x = ds.features.row(i);
    const double c1 = 0.5 - static_cast<double>(ds.labels[i]);
    for (std::size_t a = 0; a < d; ++a) {
      if (x[a] == 0.0) continue;
      obj.lambda1[a] += c1 * x[a];
      auto row = obj.lambda2.row(a);
      for (std::size_t b = 0; b < d; ++b) row[b] += 0.125 * x[a] * x[b];
    }
  }
  const double inv_n = 1.0 / static_cast<double>(rows.size());
  linalg::scale(inv_n, obj.lambda1);
  linalg::scale(inv_n, obj.lambda2.data());
  return obj;
}

double sensitivity(std::size_t dim) {
  const double d = static_cast<double>(dim);
  return d * d / 4.0 + 3.0 * d;
}

PolyObjective perturb(const PolyObjective& obj, double epsilon, std::size_t dim,
                      linalg::RngStream& rng) {
  if (!(epsilon > 0.0)) throw Error(ErrorKind::kInvalidParameter, "fm: epsilon must be > 0");
  if (obj.dim() != dim || obj.lambda2.rows() != dim || obj.lambda2.cols() != dim) {
    throw Error(ErrorKind::kDimensionMismatch, "fm: objective dimension");
  }
  const double scale = sensitivity(dim) / epsilon;
  PolyObjective out = obj;
  const Vec n2 = linalg::laplace(rng, scale, dim * dim);
  const Vec n1 = linalg::laplace(rng, scale, dim);
  const Vec n0 = linalg::laplace(rng, scale, 1);
  for (std::size_t i = 0; i < n2.size(); ++i) out.lambda2.data()[i] += n2[i];
  for (std::size_t i = 0; i < dim; ++i) out.lambda1[i] += n1[i];
  out.lambda0 += n0[0];
  for (std::size_t a = 0; a < dim; ++a) {
    for (std::size_t b = a + 1; b < dim; ++b) {
      const double sym = 0.5 * (out.lambda2(a, b) + out.lambda2(b, a));
      out.lambda2(a, b) = sym;
      out.lambda2(b, a) = sym;
    }
  }
  return out;
}

model::ModelParams train_on_objectives(const std::vector<PolyObjective>& objectives, double eta,
                                       long steps, linalg::RngStream& init_rng) {
  if (objectives.empty()) throw Error(ErrorKind::kInvalidParameter, "fm: no objectives");
  if (!(eta > 0.0)) throw Error(ErrorKind::kInvalidParameter, "fm: eta must be > 0");
  if (steps < 0) throw Error(ErrorKind::kInvalidParameter, "fm: steps must be >= 0");
  const std::size_t d = objectives.front().dim();
  for (const auto& o : objectives) {
    if (o.dim() != d) throw Error(ErrorKind::kDimensionMismatch, "fm: objectives differ in size");
  }
  model::ModelParams params = model::init_params(d, {}, init_rng);
  auto theta = params.values();
  const double k = static_cast<double>(objectives.size());
  Vec next(d);
  for (long t = 1; t <= steps; ++t) {
    std::fill(next.begin(), next.end(), 0.0);
    for (const auto& obj : objectives) {
      const Vec grad = obj.gradient(theta);
      for (std::size_t i = 0; i < d; ++i) next[i] += theta[i] - eta * grad[i];
    }
    for (std::size_t i = 0; i < d; ++i) theta[i] = next[i] / k;
    const double norm = linalg::l2_norm(theta);
    if (!(norm <= 1e6)) {
      throw Error(ErrorKind::kDivergence, "fm: ||theta|| = " + std::to_string(norm) +
                                              " exceeds 1e6 at step " + std::to_string(t) +
                                              " (eta " + std::to_string(eta) + ")");
    }
  }
  return params;
}

model::ModelParams train_fairfm(const data::TabularDataset& ds, const data::GroupPartition& part,
                                double epsilon, double eta, long steps, std::uint64_t seed) {
  std::vector<PolyObjective> noisy;
  for (int k = 0; k < part.num_groups(); ++k) {
    linalg::RngStream noise(seed, (static_cast<std::uint64_t>(kFmNoiseSite) << 32) | k);
    noisy.push_back(perturb(taylor_coefficients(ds, part.groups[k]), epsilon, ds.dim(), noise));
  }
  // Only the perturbed coefficients reach the optimizer.
  linalg::RngStream init(seed, static_cast<std::uint64_t>(kFmInitSite) << 32);
  return train_on_objectives(noisy, eta, steps, init);
}

nlohmann::json to_json(const PolyObjective& obj) {
  return {{"dim", obj.dim()},
          {"lambda2", obj.lambda2.data()},
          {"lambda1", obj.lambda1},
          {"lambda0", obj.lambda0}};
}

}  // namespace fairdp::fm
