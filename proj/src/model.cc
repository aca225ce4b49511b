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

#include <cmath>
#include <fstream>
#include <limits>

#include "fairdp/error.h"

namespace fairdp::model {
namespace {

constexpr int kCheckpointVersion = 1;

}  // namespace

ModelParams::ModelParams(std::vector<std::size_t> layer_dims) : dims_(std::move(layer_dims)) {
  if (dims_.size() < 2 || dims_.back() != 1) {
    throw Error(ErrorKind::kInvalidParameter,
                "model: need at least one layer and a scalar output");
  }
  std::size_t offset = 0;
  const std::size_t layers = dims_.size() - 1;
  for (std::size_t j = 0; j < layers; ++j) {
    if (dims_[j] == 0) throw Error(ErrorKind::kInvalidParameter, "model: zero-width layer");
    weight_offset_.push_back(offset);
    offset += dims_[j + 1] * dims_[j];
    bias_offset_.push_back(offset);
    if (j + 1 < layers) offset += dims_[j + 1];
  }
  values_.assign(offset, 0.0);
}

std::span<double> ModelParams::weights(std::size_t j) {
  return {values_.data() + weight_offset_[j], dims_[j + 1] * dims_[j]};
}
std::span<const double> ModelParams::weights(std::size_t j) const {
  return {values_.data() + weight_offset_[j], dims_[j + 1] * dims_[j]};
}
std::span<double> ModelParams::bias(std::size_t j) {
  if (j + 1 == num_layers()) return {};
  return {values_.data() + bias_offset_[j], dims_[j + 1]};
}
std::span<const double> ModelParams::bias(std::size_t j) const {
  if (j + 1 == num_layers()) return {};
  return {values_.data() + bias_offset_[j], dims_[j + 1]};
}

ModelParams init_params(std::size_t input_dim, const std::vector<std::size_t>& hidden_dims,
                        linalg::RngStream& rng) {
  std::vector<std::size_t> dims{input_dim};
  dims.insert(dims.end(), hidden_dims.begin(), hidden_dims.end());
  dims.push_back(1);
  ModelParams params(dims);
  for (std::size_t j = 0; j < params.num_layers(); ++j) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(dims[j]));
    for (double& w : params.weights(j)) w = bound * (2.0 * rng.uniform() - 1.0);
  }
  return params;
}

ForwardTrace forward(const ModelParams& params, std::span<const double> x) {
  if (x.size() != params.input_dim()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "forward: input has " + std::to_string(x.size()) + " features, model expects " +
                    std::to_string(params.input_dim()));
  }
  const auto& dims = params.layer_dims();
  const std::size_t layers = params.num_layers();
  ForwardTrace trace;
  trace.activations.reserve(layers);
  trace.pre_activations.reserve(layers);
  trace.activations.emplace_back(x.begin(), x.end());
  for (std::size_t j = 0; j + 1 < layers; ++j) {
    const auto w = params.weights(j);
    const auto b = params.bias(j);
    const Vec& in = trace.activations.back();
    Vec pre(dims[j + 1]);
    Vec act(dims[j + 1]);
    for (std::size_t r = 0; r < dims[j + 1]; ++r) {
      double acc = b[r];
      const double* wr = w.data() + r * dims[j];
      for (std::size_t c = 0; c < dims[j]; ++c) acc += wr[c] * in[c];
      pre[r] = acc;
      act[r] = acc > 0.0 ? acc : 0.0;
    }
    trace.pre_activations.push_back(std::move(pre));
    trace.activations.push_back(std::move(act));
  }
  trace.logit = linalg::inner(params.last_layer(), trace.activations.back());
  trace.pre_activations.push_back(Vec{trace.logit});
  return trace;
}

Vec penultimate(const ModelParams& params, std::span<const double> x) {
  ForwardTrace t = forward(params, x);
  return std::move(t.activations.back());
}

double predict_logit(const ModelParams& params, std::span<const double> x) {
  return forward(params, x).logit;
}

double bce_with_logit(double logit, double y) {
  return std::max(logit, 0.0) - y * logit + std::log1p(std::exp(-std::abs(logit)));
}

Vec per_example_grad(const ModelParams& params, std::span<const double> x, double y) {
  Vec out(params.size());
  GradWorkspace ws;
  per_example_grad(params, x, y, out, ws);
  return out;
}

double per_example_grad(const ModelParams& params, std::span<const double> x, double y,
                        std::span<double> out, GradWorkspace& ws) {
  if (out.size() != params.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "per_example_grad: output buffer size");
  }
  ws.trace = forward(params, x);
  const auto& dims = params.layer_dims();
  const std::size_t layers = params.num_layers();
  const double residual = linalg::sigmoid(ws.trace.logit) - y;

  // Output layer: d loss / d W_L = residual * z_{L-1}.
  {
    const std::size_t j = layers - 1;
    const Vec& in = ws.trace.activations[j];
    double* gw = out.data() + params.last_layer_offset();
    for (std::size_t c = 0; c < dims[j]; ++c) gw[c] = residual * in[c];
    ws.delta.assign(params.last_layer().begin(), params.last_layer().end());
    linalg::scale(residual, ws.delta);
  }
  // ws.delta holds d loss / d activations[j + 1] on entry to each iteration.
  std::size_t offset = params.last_layer_offset();
  for (std::size_t j = layers - 1; j-- > 0;) {
    const std::size_t rows = dims[j + 1], cols = dims[j];
    const Vec& pre = ws.trace.pre_activations[j];
    for (std::size_t r = 0; r < rows; ++r) {
      if (pre[r] <= 0.0) ws.delta[r] = 0.0;
    }
    offset -= rows;  // bias block
    double* gb = out.data() + offset;
    offset -= rows * cols;  // weight block
    double* gw = out.data() + offset;
    const Vec& in = ws.trace.activations[j];
    for (std::size_t r = 0; r < rows; ++r) {
      gb[r] = ws.delta[r];
      double* gwr = gw + r * cols;
      for (std::size_t c = 0; c < cols; ++c) gwr[c] = ws.delta[r] * in[c];
    }
    if (j > 0) {
      const auto w = params.weights(j);
      ws.next_delta.assign(cols, 0.0);
      for (std::size_t r = 0; r < rows; ++r) {
        if (ws.delta[r] == 0.0) continue;
        const double* wr = w.data() + r * cols;
        for (std::size_t c = 0; c < cols; ++c) ws.next_delta[c] += ws.delta[r] * wr[c];
      }
      std::swap(ws.delta, ws.next_delta);
    }
  }
  return bce_with_logit(ws.trace.logit, y);
}

std::span<const double> last_layer_slice(const ModelParams& params,
                                         std::span<const double> grad) {
  if (grad.size() != params.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "last_layer_slice: gradient size");
  }
  return grad.subspan(params.last_layer_offset(), params.penultimate_dim());
}

void clip_last_layer(ModelParams& params, double max_norm) {
  if (!(max_norm > 0.0)) {
    throw Error(ErrorKind::kInvalidParameter, "clip_last_layer: M must be > 0");
  }
  auto w = params.last_layer();
  const double norm = linalg::l2_norm(w);
  if (norm > max_norm) linalg::scale(max_norm / norm, w);
}

std::string OptimizerModeName(OptimizerMode mode) {
  return mode == OptimizerMode::kAdam ? "adam" : "sgd";
}

OptimizerState OptimizerState::Adam(double learning_rate) {
  OptimizerState s;
  s.mode = OptimizerMode::kAdam;
  s.learning_rate = learning_rate;
  return s;
}

OptimizerState OptimizerState::Sgd(double learning_rate) {
  OptimizerState s;
  s.mode = OptimizerMode::kSgd;
  s.learning_rate = learning_rate;
  return s;
}

void OptimizerState::switch_to_sgd(double lr) {
  mode = OptimizerMode::kSgd;
  learning_rate = lr;
  first_moment.clear();
  second_moment.clear();
  step_count = 0;
}

void step(ModelParams& params, OptimizerState& opt, std::span<const double> update) {
  if (update.size() != params.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "step: update size does not match parameters");
  }
  if (!(opt.learning_rate > 0.0)) {
    throw Error(ErrorKind::kInvalidParameter, "step: learning rate must be > 0");
  }
  auto theta = params.values();
  if (opt.mode == OptimizerMode::kSgd) {
    for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= opt.learning_rate * update[i];
    return;
  }
  if (opt.first_moment.size() != theta.size()) {
    opt.first_moment.assign(theta.size(), 0.0);
    opt.second_moment.assign(theta.size(), 0.0);
    opt.step_count = 0;
  }
  ++opt.step_count;
  const double c1 = 1.0 - std::pow(opt.beta1, static_cast<double>(opt.step_count));
  const double c2 = 1.0 - std::pow(opt.beta2, static_cast<double>(opt.step_count));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double g = update[i];
    opt.first_moment[i] = opt.beta1 * opt.first_moment[i] + (1.0 - opt.beta1) * g;
    opt.second_moment[i] = opt.beta2 * opt.second_moment[i] + (1.0 - opt.beta2) * g * g;
    const double m_hat = opt.first_moment[i] / c1;
    const double v_hat = opt.second_moment[i] / c2;
    theta[i] -= opt.learning_rate * m_hat / (std::sqrt(v_hat) + opt.epsilon);
  }
}

nlohmann::json to_json(const ModelParams& params) {
  return {{"format", "fairdp-mlp"},
          {"version", kCheckpointVersion},
          {"layer_dims", params.layer_dims()},
          {"values", std::vector<double>(params.values().begin(), params.values().end())}};
}

ModelParams params_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "fairdp-mlp") {
      throw Error(ErrorKind::kFormat, "checkpoint: unexpected format tag");
    }
    if (j.at("version").get<int>() != kCheckpointVersion) {
      throw Error(ErrorKind::kFormat, "checkpoint: unsupported version");
    }
    ModelParams params(j.at("layer_dims").get<std::vector<std::size_t>>());
    const auto values = j.at("values").get<std::vector<double>>();
    if (values.size() != params.size()) {
      throw Error(ErrorKind::kFormat, "checkpoint: value count does not match layer dims");
    }
    std::copy(values.begin(), values.end(), params.values().begin());
    return params;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kFormat, std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const ModelParams& params, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write '" + path + "'");
  out << to_json(params).dump(1) << '\n';
}

ModelParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kFormat, std::string("checkpoint: ") + e.what());
  }
  return params_from_json(j);
}

}  // namespace fairdp::model
