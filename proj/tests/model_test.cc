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

#include "fairdp/model.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <vector>

#include "doctest.h"
#include "fairdp/error.h"
#include "oracles.h"

namespace fairdp::model {
namespace {

double loss_at(const ModelParams& params, std::span<const double> x, double y) {
  return bce_with_logit(predict_logit(params, x), y);
}

double max_relative_error(const Vec& a, const Vec& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double scale = std::max({std::fabs(a[i]), std::fabs(b[i]), 1e-6});
    worst = std::max(worst, std::fabs(a[i] - b[i]) / scale);
  }
  return worst;
}

TEST_CASE("parameter layout") {
  ModelParams p({3, 4, 2, 1});
  CHECK(p.num_layers() == 3);
  CHECK(p.size() == 3 * 4 + 4 + 4 * 2 + 2 + 2);
  CHECK(p.penultimate_dim() == 2);
  CHECK(p.last_layer().size() == 2);
  CHECK(p.bias(2).empty());
  CHECK(p.last_layer_offset() == p.size() - 2);
  p.last_layer()[1] = 7.0;
  CHECK(p.values().back() == 7.0);
}

TEST_CASE("forward pass") {
  ModelParams zero({3, 5, 1});
  const Vec x{0.2, 0.4, 0.9};
  const auto trace = forward(zero, x);
  CHECK(trace.logit == 0.0);
  CHECK(trace.probability() == 0.5);

  ModelParams linear({1, 1});
  linear.last_layer()[0] = 1.0;
  CHECK(predict_logit(linear, Vec{2.0}) == 2.0);
  CHECK(forward(linear, Vec{2.0}).probability() == linalg::sigmoid(2.0));

  linalg::RngStream rng(4, 0);
  const ModelParams p = init_params(3, {6, 4}, rng);
  for (int i = 0; i < 20; ++i) {
    const Vec xi = linalg::gaussian(rng, 0, 1, 3);
    const double prob = forward(p, xi).probability();
    CHECK(prob > 0.0);
    CHECK(prob < 1.0);
  }
  const Vec z = penultimate(p, x);
  CHECK(z.size() == 4);
  CHECK(linalg::inner(p.last_layer(), z) == doctest::Approx(predict_logit(p, x)).epsilon(1e-15));
  CHECK_THROWS_AS(forward(p, Vec{1.0}), Error);
}

TEST_CASE("init is bounded by fan-in") {
  linalg::RngStream rng(5, 0);
  const ModelParams p = init_params(16, {8}, rng);
  for (double w : p.weights(0)) CHECK(std::fabs(w) <= 1.0 / 4.0);
  for (double w : p.weights(1)) CHECK(std::fabs(w) <= 1.0 / std::sqrt(8.0));
  for (double b : p.bias(0)) CHECK(b == 0.0);
}

TEST_CASE("bce is stable") {
  CHECK(bce_with_logit(0.0, 1.0) == doctest::Approx(std::log(2.0)));
  CHECK(bce_with_logit(800.0, 1.0) == doctest::Approx(0.0));
  CHECK(bce_with_logit(-800.0, 1.0) == doctest::Approx(800.0));
  CHECK(std::isfinite(bce_with_logit(-1e5, 0.0)));
}

TEST_CASE("gradients match finite differences") {
  linalg::RngStream rng(6, 0);
  const std::vector<std::vector<std::size_t>> archs{{}, {4}, {5, 3}, {7, 6, 2}};
  for (const auto& hidden : archs) {
    for (int trial = 0; trial < 3; ++trial) {
      const std::size_t d = 3 + static_cast<std::size_t>(trial);
      const ModelParams p = init_params(d, hidden, rng);
      const Vec x = linalg::gaussian(rng, 0, 1, d);
      const double y = trial % 2;
      const Vec g = per_example_grad(p, x, y);
      const Vec fd = oracle::finite_difference(
          [&](const Vec& v) {
            ModelParams q = p;
            std::copy(v.begin(), v.end(), q.values().begin());
            return loss_at(q, x, y);
          },
          Vec(p.values().begin(), p.values().end()), 1e-5);
      CHECK(max_relative_error(g, fd) <= 1e-4);
    }
  }
}

TEST_CASE("gradient vanishes at the fixed point") {
  linalg::RngStream rng(7, 0);
  const ModelParams p = init_params(4, {5}, rng);
  const Vec x{0.1, 0.7, 0.3, 0.9};
  const double y = forward(p, x).probability();
  const Vec g = per_example_grad(p, x, y);
  for (double v : last_layer_slice(p, g)) CHECK(std::fabs(v) < 1e-15);
}

TEST_CASE("batch gradient is the mean of per-example gradients") {
  linalg::RngStream rng(8, 0);
  const ModelParams p = init_params(3, {4}, rng);
  const std::vector<Vec> xs{{0.1, 0.2, 0.3}, {0.9, 0.1, 0.5}, {0.4, 0.4, 0.8}};
  const std::vector<double> ys{1, 0, 1};
  Vec mean(p.size(), 0.0);
  for (int i = 0; i < 3; ++i) linalg::axpy(1.0 / 3.0, per_example_grad(p, xs[i], ys[i]), mean);
  const Vec fd = oracle::finite_difference(
      [&](const Vec& v) {
        ModelParams q = p;
        std::copy(v.begin(), v.end(), q.values().begin());
        double total = 0.0;
        for (int i = 0; i < 3; ++i) total += loss_at(q, xs[i], ys[i]);
        return total / 3.0;
      },
      Vec(p.values().begin(), p.values().end()), 1e-5);
  CHECK(max_relative_error(mean, fd) <= 1e-4);
}

TEST_CASE("last-layer clipping") {
  ModelParams p({2, 2, 1});
  p.last_layer()[0] = 0.3;
  p.last_layer()[1] = 0.4;
  const ModelParams before = p;
  clip_last_layer(p, 1.0);
  CHECK(p == before);

  p.last_layer()[0] = 3.0;
  p.last_layer()[1] = 4.0;
  p.weights(0)[0] = 9.0;
  clip_last_layer(p, 1.0);
  CHECK(p.last_layer()[0] == doctest::Approx(0.6));
  CHECK(p.last_layer()[1] == doctest::Approx(0.8));
  CHECK(p.weights(0)[0] == 9.0);
  const ModelParams once = p;
  clip_last_layer(p, 1.0);
  CHECK(p == once);

  clip_last_layer(p, std::numeric_limits<double>::infinity());
  CHECK(p == once);
  CHECK_THROWS_AS(clip_last_layer(p, 0.0), Error);
}

TEST_CASE("optimizer steps") {
  ModelParams p({1, 1});
  p.last_layer()[0] = 5.0;
  auto sgd = OptimizerState::Sgd(1.0);
  step(p, sgd, Vec{0.0});
  CHECK(p.last_layer()[0] == 5.0);
  step(p, sgd, Vec{2.0});
  CHECK(p.last_layer()[0] == 3.0);

  ModelParams q({3, 1});
  auto adam = OptimizerState::Adam(0.02);
  const Vec g{0.5, -3.0, 1e-3};
  step(q, adam, g);
  CHECK(q.last_layer()[0] == doctest::Approx(-0.02).epsilon(1e-6));
  CHECK(q.last_layer()[1] == doctest::Approx(0.02).epsilon(1e-6));
  CHECK(q.last_layer()[2] == doctest::Approx(-0.02).epsilon(1e-4));

  adam.switch_to_sgd(0.005);
  CHECK(adam.mode == OptimizerMode::kSgd);
  CHECK(adam.learning_rate == 0.005);
  CHECK(adam.first_moment.empty());
  CHECK_THROWS_AS(step(q, adam, Vec{1.0}), Error);
}

TEST_CASE("checkpoints round-trip exactly") {
  linalg::RngStream rng(9, 0);
  const ModelParams p = init_params(5, {4, 3}, rng);
  const auto path = std::filesystem::temp_directory_path() / "fairdp_model_test.json";
  save_checkpoint(p, path.string());
  CHECK(load_checkpoint(path.string()) == p);
  std::filesystem::remove(path);

  CHECK(params_from_json(to_json(p)) == p);
  auto bad = to_json(p);
  bad["values"].erase(0);
  CHECK_THROWS_AS(params_from_json(bad), Error);
  bad = to_json(p);
  bad["format"] = "something-else";
  CHECK_THROWS_AS(params_from_json(bad), Error);
  CHECK_THROWS_AS(load_checkpoint("/nonexistent/checkpoint.json"), Error);
}

}  // namespace
}  // namespace fairdp::model
