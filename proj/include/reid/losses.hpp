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

// Training objectives with hand-derived gradients:
//   L2-softmax        softmax cross-entropy on alpha * x / ||x||
//   pixel CE          per-pixel multi-class cross-entropy, averaged over H*W
//   heatmap MSE       unreduced sum of squared heatmap differences
//   orientation CE    8-way softmax cross-entropy
//   stage-2 loss      heatmap MSE + lambda * orientation CE
//
// Class labels are 0-based throughout. All arithmetic is in double.

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "reid/heatmaps.hpp"
#include "reid/matrix.hpp"
#include "reid/orientation.hpp"

namespace reid {

inline constexpr double kMinFeatureNorm = 1e-12;
inline constexpr double kDefaultAlpha = 30.0;
inline constexpr double kStage2OrientationWeight = 10.0;

// log(sum_i exp(v_i)) with the max-shift.
double log_sum_exp(std::span<const double> v);

// -log softmax(logits)[target]. When grad is non-empty it receives
// softmax(logits) - onehot(target).
double softmax_cross_entropy(std::span<const double> logits, std::size_t target,
                             std::span<double> grad = {});

struct L2SoftmaxParams {
  Matrix weights;             // N x D, row j is W_j
  std::vector<double> bias;   // N
  double alpha = kDefaultAlpha;

  std::size_t num_classes() const { return weights.rows(); }
  std::size_t dim() const { return weights.cols(); }
  // Throws InvalidArgument / DimensionError on violated invariants.
  void validate() const;
};

struct L2SoftmaxGrad {
  double loss = 0.0;
  std::vector<double> d_input;  // D
  Matrix d_weights;             // N x D
  std::vector<double> d_bias;   // N
  double d_alpha = 0.0;
};

// Throws DegenerateInput when ||x|| < 1e-12.
double l2softmax_loss(std::span<const double> x, std::size_t label, const L2SoftmaxParams& params);
L2SoftmaxGrad l2softmax_grad(std::span<const double> x, std::size_t label,
                             const L2SoftmaxParams& params);

struct LossWithGrad {
  double loss = 0.0;
  std::vector<double> grad;  // same layout as the differentiated input
};

// Per-pixel class labels in [0, classes).
struct PixelTarget {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<int> labels;  // row-major
};

// logits: N1 x H x W, N1 >= 2.
LossWithGrad pixel_ce_loss(const HeatmapStack& logits, const PixelTarget& target);

// Sum over channels and pixels of (pred - gt)^2; grad = 2 (pred - gt).
LossWithGrad heatmap_mse_loss(const HeatmapStack& pred, const HeatmapStack& gt);

LossWithGrad orientation_ce_loss(std::span<const double> logits, int target);

struct Stage2Loss {
  double total = 0.0;
  double heatmap = 0.0;
  double orientation = 0.0;
  std::vector<double> heatmap_grad;
  std::vector<double> logit_grad;
};

Stage2Loss stage2_loss(const HeatmapStack& pred, const HeatmapStack& gt,
                       std::span<const double> orientation_logits, int orientation_target,
                       double lambda = kStage2OrientationWeight);

}  // namespace reid
