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

// Binary-classification MLP: ReLU hidden layers, a bias-free scalar output
// layer, and a sigmoid on top.
//
// Parameters live in one flat vector in canonical order: layer by layer,
// each layer's weight matrix row-major (out x in) followed by its bias.
// The output layer has no bias, so its weights W_L are the trailing
// `penultimate_dim()` entries of the flat vector.

#ifndef FAIRDP_MODEL_H_
#define FAIRDP_MODEL_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fairdp/linalg.h"
#include "json.hpp"

namespace fairdp::model {

using linalg::Vec;

class ModelParams {
 public:
  ModelParams() = default;
  // layer_dims = {input, hidden..., 1}; parameters start at zero.
  explicit ModelParams(std::vector<std::size_t> layer_dims);

  std::size_t num_layers() const { return dims_.size() - 1; }
  const std::vector<std::size_t>& layer_dims() const { return dims_; }
  std::size_t input_dim() const { return dims_.front(); }
  std::size_t penultimate_dim() const { return dims_[dims_.size() - 2]; }
  std::size_t size() const { return values_.size(); }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  // Weight matrix of layer j (0-based), row-major out x in.
  std::span<double> weights(std::size_t j);
  std::span<const double> weights(std::size_t j) const;
  // Empty for the output layer.
  std::span<double> bias(std::size_t j);
  std::span<const double> bias(std::size_t j) const;

  std::span<double> last_layer() { return weights(num_layers() - 1); }
  std::span<const double> last_layer() const { return weights(num_layers() - 1); }
  std::size_t last_layer_offset() const { return weight_offset_.back(); }

  bool operator==(const ModelParams&) const = default;

 private:
  std::vector<std::size_t> dims_;
  std::vector<std::size_t> weight_offset_;
  std::vector<std::size_t> bias_offset_;
  Vec values_;
};

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases.
ModelParams init_params(std::size_t input_dim, const std::vector<std::size_t>& hidden_dims,
                        linalg::RngStream& rng);

struct ForwardTrace {
  // pre_activations[j] is layer j's affine output; activations[0] is the input
  // and activations[j + 1] = relu(pre_activations[j]) for hidden layers.
  std::vector<Vec> pre_activations;
  std::vector<Vec> activations;
  double logit = 0.0;

  std::span<const double> penultimate() const { return activations.back(); }
  double probability() const { return linalg::sigmoid(logit); }
};

ForwardTrace forward(const ModelParams& params, std::span<const double> x);

// Penultimate activation z_{L-1} only.
Vec penultimate(const ModelParams& params, std::span<const double> x);
double predict_logit(const ModelParams& params, std::span<const double> x);

// Binary cross-entropy on the sigmoid output, computed from the logit.
double bce_with_logit(double logit, double y);

// Reusable buffers for per-example backward passes.
struct GradWorkspace {
  ForwardTrace trace;
  Vec delta;
  Vec next_delta;
};

// Gradient of bce(h(x), y) w.r.t. all parameters in canonical order. y is a
// target probability; training labels are 0 or 1.
Vec per_example_grad(const ModelParams& params, std::span<const double> x, double y);
// Same, writing into `out` (size params.size()); returns the example's loss.
double per_example_grad(const ModelParams& params, std::span<const double> x, double y,
                        std::span<double> out, GradWorkspace& ws);

// Slice of a flat gradient that belongs to W_L.
std::span<const double> last_layer_slice(const ModelParams& params, std::span<const double> grad);

// W_L <- W_L * min(1, M / ||W_L||). M may be +inf.
void clip_last_layer(ModelParams& params, double max_norm);

enum class OptimizerMode { kAdam, kSgd };

std::string OptimizerModeName(OptimizerMode mode);

struct OptimizerState {
  OptimizerMode mode = OptimizerMode::kSgd;
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  Vec first_moment;
  Vec second_moment;
  long step_count = 0;

  static OptimizerState Adam(double learning_rate);
  static OptimizerState Sgd(double learning_rate);

  // Discards Adam moments.
  void switch_to_sgd(double learning_rate);
};

void step(ModelParams& params, OptimizerState& opt, std::span<const double> update);

nlohmann::json to_json(const ModelParams& params);
ModelParams params_from_json(const nlohmann::json& j);
void save_checkpoint(const ModelParams& params, const std::string& path);
ModelParams load_checkpoint(const std::string& path);

}  // namespace fairdp::model

#endif  // FAIRDP_MODEL_H_
