// Copyright 2026 The reidkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Fusion head: concatenates a global and a local feature vector, runs them
// through a small ReLU MLP and classifies the last hidden activation with an
// L2-softmax layer. The last hidden activation, unit-normalized, is the
// retrieval embedding. Training is mini-batch Adam with hand-written backprop.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "reid/losses.hpp"
#include "reid/matrix.hpp"

namespace reid {

struct FusionConfig {
  std::size_t global_dim = 2048;
  std::size_t local_dim = 2048;
  std::vector<std::size_t> hidden = {1024, 512};
  std::size_t num_classes = 2;
  double learning_rate = 1e-4;
  std::size_t batch_size = 150;
  std::size_t epochs = 20;
  std::uint64_t seed = 0;
  double alpha_init = kDefaultAlpha;

  std::size_t input_dim() const { return global_dim + local_dim; }
  std::size_t embedding_dim() const { return hidden.empty() ? 0 : hidden.back(); }
  void validate() const;
};

// Length of FusionHead::parameters() for a head built from `config`.
std::size_t fusion_parameter_count(const FusionConfig& config);

struct DenseLayer {
  Matrix weights;            // out x in
  std::vector<double> bias;  // out
};

class FusionHead {
 public:
  // Seeded uniform initialization in [-1/sqrt(fan_in), 1/sqrt(fan_in)];
  // biases start at zero and alpha at config.alpha_init.
  static FusionHead initialize(const FusionConfig& config);

  FusionHead(FusionConfig config, std::vector<DenseLayer> layers, L2SoftmaxParams classifier);

  const FusionConfig& config() const { return config_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  const L2SoftmaxParams& classifier() const { return classifier_; }

  // Flat parameter vector: each hidden layer's weights (row-major) then bias,
  // then classifier weights, classifier bias, alpha.
  std::size_t num_parameters() const;
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> flat);

  // Bumped on every parameter change; forward caches record it.
  std::uint64_t version() const { return version_; }

 private:
  FusionConfig config_;
  std::vector<DenseLayer> layers_;
  L2SoftmaxParams classifier_;
  std::uint64_t version_ = 0;
};

// [global || local]; dimensions checked against the config.
std::vector<double> fuse(const FusionConfig& config, std::span<const double> global,
                         std::span<const double> local);

struct ForwardCache {
  std::vector<std::vector<double>> pre_activations;  // z_l, one per hidden layer
  std::vector<std::vector<double>> activations;      // a_0 = input, a_l = relu(z_l)
  std::uint64_t head_version = 0;

  std::span<const double> embedding() const { return activations.back(); }
};

ForwardCache forward(const FusionHead& head, std::span<const double> input);

struct FusionGradients {
  double loss = 0.0;
  std::vector<double> flat;  // same layout as FusionHead::parameters()
};

// Throws InvalidArgument when the cache was produced by different parameters.
FusionGradients backward(const FusionHead& head, const ForwardCache& cache, std::size_t label);

// Loss of one sample; shorthand for forward + the classifier objective.
double sample_loss(const FusionHead& head, std::span<const double> input, std::size_t label);
std::size_t predict(const FusionHead& head, std::span<const double> input);

struct AdamOptions {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;

  explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

// Bias-corrected Adam. Throws NonFiniteError on a non-finite gradient.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const AdamOptions& options);

struct FusionSample {
  std::vector<double> global;
  std::vector<double> local;
  std::size_t label = 0;
};

struct EpochStats {
  double loss = 0.0;      // mean training-set loss after the epoch's updates
  double accuracy = 0.0;  // training-set accuracy after the epoch's updates
};

struct TrainHistory {
  double initial_loss = 0.0;
  std::vector<EpochStats> epochs;
  std::uint64_t checksum = 0;  // FNV-1a over the final parameters' bytes
};

struct TrainResult {
  FusionHead head;
  TrainHistory history;
};

// Deterministic for a fixed (config, samples). Rejects datasets with fewer
// than two distinct labels.
TrainResult train(const FusionConfig& config, std::span<const FusionSample> samples);

// Last hidden activation scaled to unit length.
std::vector<double> embed(const FusionHead& head, std::span<const double> global,
                          std::span<const double> local);

std::uint64_t parameter_checksum(std::span<const double> params);

}  // namespace reid
