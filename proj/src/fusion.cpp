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

#include "reid/fusion.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>
#include <string>

#include "reid/error.hpp"
#include "reid/random.hpp"
#include "reid/simd.hpp"

namespace reid {
std::size_t fusion_parameter_count(const FusionConfig& c) {
  std::size_t n = 0;
  std::size_t fan_in = c.input_dim();
  for (std::size_t width : c.hidden) {
    n += width * fan_in + width;
    fan_in = width;
  }
  return n + c.num_classes * fan_in + c.num_classes + 1;
}

namespace {

void check_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw NonFiniteError(std::string(what) + ": non-finite value");
  }
}

}  // namespace

void FusionConfig::validate() const {
  if (global_dim < 1 || local_dim < 1) throw InvalidArgument("fusion: feature dims must be >= 1");
  if (hidden.empty()) throw InvalidArgument("fusion: at least one hidden layer is required");
  for (std::size_t w : hidden) {
    if (w < 1) throw InvalidArgument("fusion: hidden widths must be >= 1");
  }
  if (num_classes < 2) throw InvalidArgument("fusion: need at least 2 classes");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw InvalidArgument("fusion: learning rate must be finite and non-negative");
  }
  if (batch_size < 1) throw InvalidArgument("fusion: batch size must be >= 1");
  if (!(alpha_init > 0.0)) throw InvalidArgument("fusion: alpha_init must be positive");
}

FusionHead FusionHead::initialize(const FusionConfig& config) {
  config.validate();
  Rng rng(config.seed);
  auto init_matrix = [&rng](std::size_t out, std::size_t in) {
    Matrix m(out, in);
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    for (double& w : m.data()) w = rng.uniform(-bound, bound);
    return m;
  };

  std::vector<DenseLayer> layers;
  std::size_t fan_in = config.input_dim();
  for (std::size_t width : config.hidden) {
    layers.push_back(DenseLayer{init_matrix(width, fan_in), std::vector<double>(width, 0.0)});
    fan_in = width;
  }
  L2SoftmaxParams cls{init_matrix(config.num_classes, fan_in),
                      std::vector<double>(config.num_classes, 0.0), config.alpha_init};
  return FusionHead(config, std::move(layers), std::move(cls));
}

FusionHead::FusionHead(FusionConfig config, std::vector<DenseLayer> layers,
                       L2SoftmaxParams classifier)
    : config_(std::move(config)), layers_(std::move(layers)), classifier_(std::move(classifier)) {
  config_.validate();
  if (layers_.size() != config_.hidden.size()) {
    throw DimensionError("fusion: layer count does not match config");
  }
  std::size_t fan_in = config_.input_dim();
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    if (layer.weights.rows() != config_.hidden[l] || layer.weights.cols() != fan_in ||
        layer.bias.size() != config_.hidden[l]) {
      throw DimensionError("fusion: layer " + std::to_string(l) + " shape does not chain");
    }
    fan_in = config_.hidden[l];
  }
  if (classifier_.dim() != fan_in || classifier_.num_classes() != config_.num_classes) {
    throw DimensionError("fusion: classifier shape does not match config");
  }
  classifier_.validate();
}

std::size_t FusionHead::num_parameters() const { return fusion_parameter_count(config_); }

std::vector<double> FusionHead::parameters() const {
  std::vector<double> flat;
  flat.reserve(num_parameters());
  for (const auto& layer : layers_) {
    flat.insert(flat.end(), layer.weights.data().begin(), layer.weights.data().end());
    flat.insert(flat.end(), layer.bias.begin(), layer.bias.end());
  }
  flat.insert(flat.end(), classifier_.weights.data().begin(), classifier_.weights.data().end());
  flat.insert(flat.end(), classifier_.bias.begin(), classifier_.bias.end());
  flat.push_back(classifier_.alpha);
  return flat;
}

void FusionHead::set_parameters(std::span<const double> flat) {
  if (flat.size() != num_parameters()) {
    throw DimensionError("fusion: expected " + std::to_string(num_parameters()) +
                         " parameters, got " + std::to_string(flat.size()));
  }
  auto take = [&flat](std::span<double> dst) {
    std::copy_n(flat.begin(), dst.size(), dst.begin());
    flat = flat.subspan(dst.size());
  };
  for (auto& layer : layers_) {
    take(layer.weights.data());
    take(layer.bias);
  }
  take(classifier_.weights.data());
  take(classifier_.bias);
  classifier_.alpha = flat[0];
  ++version_;
}

std::vector<double> fuse(const FusionConfig& config, std::span<const double> global,
                         std::span<const double> local) {
  if (global.size() != config.global_dim || local.size() != config.local_dim) {
    throw DimensionError("fuse: got " + std::to_string(global.size()) + "+" +
                         std::to_string(local.size()) + " dims, expected " +
                         std::to_string(config.global_dim) + "+" +
                         std::to_string(config.local_dim));
  }
  std::vector<double> out;
  out.reserve(global.size() + local.size());
  out.insert(out.end(), global.begin(), global.end());
  out.insert(out.end(), local.begin(), local.end());
  return out;
}

ForwardCache forward(const FusionHead& head, std::span<const double> input) {
  if (input.size() != head.config().input_dim()) {
    throw DimensionError("forward: input has " + std::to_string(input.size()) +
                         " dims, head expects " + std::to_string(head.config().input_dim()));
  }
  ForwardCache cache;
  cache.head_version = head.version();
  cache.activations.emplace_back(input.begin(), input.end());
  for (const auto& layer : head.layers()) {
    const auto& prev = cache.activations.back();
    std::vector<double> z(layer.bias);
    for (std::size_t r = 0; r < z.size(); ++r) z[r] += simd::dot(layer.weights.row(r), prev);
    std::vector<double> a(z.size());
    for (std::size_t r = 0; r < z.size(); ++r) a[r] = z[r] > 0.0 ? z[r] : 0.0;
    cache.pre_activations.push_back(std::move(z));
    cache.activations.push_back(std::move(a));
  }
  return cache;
}

FusionGradients backward(const FusionHead& head, const ForwardCache& cache, std::size_t label) {
  const auto& layers = head.layers();
  if (cache.head_version != head.version() || cache.activations.size() != layers.size() + 1) {
    throw InvalidArgument("backward: stale forward cache");
  }

  const auto cls = l2softmax_grad(cache.embedding(), label, head.classifier());
  FusionGradients out;
  out.loss = cls.loss;
  out.flat.assign(head.num_parameters(), 0.0);

  // Offsets of each layer's block inside the flat layout.
  std::vector<std::size_t> offsets;
  std::size_t cursor = 0;
  for (const auto& layer : layers) {
    offsets.push_back(cursor);
    cursor += layer.weights.size() + layer.bias.size();
  }
  std::copy(cls.d_weights.data().begin(), cls.d_weights.data().end(), out.flat.begin() + cursor);
  cursor += cls.d_weights.size();
  std::copy(cls.d_bias.begin(), cls.d_bias.end(), out.flat.begin() + cursor);
  cursor += cls.d_bias.size();
  out.flat[cursor] = cls.d_alpha;

  std::vector<double> d_act = cls.d_input;
  for (std::size_t l = layers.size(); l-- > 0;) {
    const auto& layer = layers[l];
    const auto& z = cache.pre_activations[l];
    const auto& prev = cache.activations[l];
    const std::size_t in = layer.weights.cols();
    double* d_w = out.flat.data() + offsets[l];
    double* d_b = d_w + layer.weights.size();

    std::vector<double> d_prev(in, 0.0);
    for (std::size_t r = 0; r < z.size(); ++r) {
      const double dz = z[r] > 0.0 ? d_act[r] : 0.0;
      if (dz == 0.0) continue;
      d_b[r] = dz;
      simd::axpy(dz, prev, std::span<double>(d_w + r * in, in));
      simd::axpy(dz, layer.weights.row(r), d_prev);
    }
    d_act = std::move(d_prev);
  }
  return out;
}

double sample_loss(const FusionHead& head, std::span<const double> input, std::size_t label) {
  const auto cache = forward(head, input);
  return l2softmax_loss(cache.embedding(), label, head.classifier());
}

std::size_t predict(const FusionHead& head, std::span<const double> input) {
  const auto cache = forward(head, input);
  const auto& cls = head.classifier();
  const auto x = cache.embedding();
  const double norm = std::sqrt(simd::dot(x, x));
  if (!(norm >= kMinFeatureNorm)) throw DegenerateInput("predict: zero embedding");
  std::size_t best = 0;
  double best_logit = 0.0;
  for (std::size_t j = 0; j < cls.num_classes(); ++j) {
    const double logit = cls.alpha * simd::dot(cls.weights.row(j), x) / norm + cls.bias[j];
    if (j == 0 || logit > best_logit) {
      best = j;
      best_logit = logit;
    }
  }
  return best;
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const AdamOptions& options) {
  if (params.size() != grads.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw DimensionError("adam_step: parameter / gradient / state size mismatch");
  }
  check_finite(grads, "adam_step gradient");
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bias1 = 1.0 - std::pow(options.beta1, t);
  const double bias2 = 1.0 - std::pow(options.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = options.beta1 * state.m[i] + (1.0 - options.beta1) * g;
    state.v[i] = options.beta2 * state.v[i] + (1.0 - options.beta2) * g * g;
    const double m_hat = state.m[i] / bias1;
    const double v_hat = state.v[i] / bias2;
    params[i] -= options.learning_rate * m_hat / (std::sqrt(v_hat) + options.epsilon);
  }
}

std::uint64_t parameter_checksum(std::span<const double> params) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (double p : params) {
    const auto bits = std::bit_cast<std::uint64_t>(p);
    for (int byte = 0; byte < 8; ++byte) {
      hash ^= (bits >> (8 * byte)) & 0xffu;
      hash *= 0x100000001b3ULL;
    }
  }
  return hash;
}

namespace {

EpochStats evaluate_training_set(const FusionHead& head,
                                 const std::vector<std::vector<double>>& inputs,
                                 std::span<const FusionSample> samples) {
  EpochStats stats;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto cache = forward(head, inputs[i]);
    stats.loss += l2softmax_loss(cache.embedding(), samples[i].label, head.classifier());
    if (predict(head, inputs[i]) == samples[i].label) ++correct;
  }
  stats.loss /= static_cast<double>(samples.size());
  stats.accuracy = static_cast<double>(correct) / static_cast<double>(samples.size());
  return stats;
}

}  // namespace

TrainResult train(const FusionConfig& config, std::span<const FusionSample> samples) {
  config.validate();
  std::set<std::size_t> labels;
  std::vector<std::vector<double>> inputs;
  inputs.reserve(samples.size());
  for (const auto& s : samples) {
    if (s.label >= config.num_classes) {
      throw InvalidArgument("train: label " + std::to_string(s.label) + " >= class count");
    }
    labels.insert(s.label);
    inputs.push_back(fuse(config, s.global, s.local));
  }
  if (labels.size() < 2) {
    throw DegenerateInput("train: dataset must contain at least two classes");
  }

  const auto seeds = derive_seeds(config.seed, 2);
  FusionConfig init_config = config;
  init_config.seed = seeds[0];
  FusionHead head = FusionHead::initialize(init_config);
  head = FusionHead(config, head.layers(), head.classifier());
  Rng shuffle_rng(seeds[1]);

  TrainHistory history;
  history.initial_loss = evaluate_training_set(head, inputs, samples).loss;

  std::vector<double> params = head.parameters();
  AdamState state(params.size());
  const AdamOptions options{config.learning_rate};
  std::vector<std::size_t> order(samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<double> batch_grad(params.size());

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::fill(batch_grad.begin(), batch_grad.end(), 0.0);
      // Accumulated in shuffled sample order, then averaged.
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t i = order[k];
        const auto cache = forward(head, inputs[i]);
        const auto grads = backward(head, cache, samples[i].label);
        simd::axpy(1.0, grads.flat, batch_grad);
      }
      const double inv = 1.0 / static_cast<double>(end - start);
      for (double& g : batch_grad) g *= inv;
      adam_step(params, batch_grad, state, options);
      head.set_parameters(params);
    }
    history.epochs.push_back(evaluate_training_set(head, inputs, samples));
  }
  history.checksum = parameter_checksum(params);
  return TrainResult{std::move(head), std::move(history)};
}

std::vector<double> embed(const FusionHead& head, std::span<const double> global,
                          std::span<const double> local) {
  const auto cache = forward(head, fuse(head.config(), global, local));
  const auto x = cache.embedding();
  const double norm = std::sqrt(simd::dot(x, x));
  if (!(norm >= kMinFeatureNorm)) throw DegenerateInput("embed: zero embedding");
  std::vector<double> out(x.begin(), x.end());
  for (double& v : out) v /= norm;
  return out;
}

}  // namespace reid
