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

#include "reid/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "reid/error.hpp"
#include "reid/simd.hpp"

namespace reid {
namespace {

double norm2(std::span<const double> x) { return std::sqrt(simd::dot(x, x)); }

void check_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw NonFiniteError(std::string(what) + ": non-finite value");
  }
}

// Shared forward pass of the L2-softmax objective.
struct L2SoftmaxForward {
  double norm = 0.0;
  std::vector<double> unit;    // x / ||x||
  std::vector<double> logits;  // W (alpha * unit) + b
};

L2SoftmaxForward l2softmax_forward(std::span<const double> x, std::size_t label,
                                   const L2SoftmaxParams& params) {
  params.validate();
  if (x.size() != params.dim()) {
    throw DimensionError("l2softmax: input has " + std::to_string(x.size()) +
                         " dims, weights expect " + std::to_string(params.dim()));
  }
  if (label >= params.num_classes()) {
    throw InvalidArgument("l2softmax: label " + std::to_string(label) + " >= class count");
  }
  check_finite(x, "l2softmax input");
  L2SoftmaxForward fw;
  fw.norm = norm2(x);
  if (!(fw.norm >= kMinFeatureNorm)) {
    throw DegenerateInput("l2softmax: input norm below 1e-12");
  }
  fw.unit.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) fw.unit[i] = x[i] / fw.norm;
  fw.logits.resize(params.num_classes());
  for (std::size_t j = 0; j < params.num_classes(); ++j) {
    fw.logits[j] = params.alpha * simd::dot(params.weights.row(j), fw.unit) + params.bias[j];
  }
  return fw;
}

}  // namespace

double log_sum_exp(std::span<const double> v) {
  if (v.empty()) throw DimensionError("log_sum_exp: empty input");
  const double shift = *std::ranges::max_element(v);
  double sum = 0.0;
  for (double x : v) sum += std::exp(x - shift);
  return shift + std::log(sum);
}

double softmax_cross_entropy(std::span<const double> logits, std::size_t target,
                             std::span<double> grad) {
  if (target >= logits.size()) {
    throw InvalidArgument("cross entropy: target " + std::to_string(target) + " out of range");
  }
  const double lse = log_sum_exp(logits);
  if (!grad.empty()) {
    for (std::size_t k = 0; k < logits.size(); ++k) grad[k] = std::exp(logits[k] - lse);
    grad[target] -= 1.0;
  }
  return lse - logits[target];
}

void L2SoftmaxParams::validate() const {
  if (weights.rows() < 2) throw InvalidArgument("l2softmax: need at least 2 classes");
  if (weights.cols() < 1) throw InvalidArgument("l2softmax: feature dim must be >= 1");
  if (bias.size() != weights.rows()) throw DimensionError("l2softmax: bias length mismatch");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw InvalidArgument("l2softmax: alpha must be positive");
  }
}

double l2softmax_loss(std::span<const double> x, std::size_t label,
                      const L2SoftmaxParams& params) {
  const auto fw = l2softmax_forward(x, label, params);
  return softmax_cross_entropy(fw.logits, label);
}

L2SoftmaxGrad l2softmax_grad(std::span<const double> x, std::size_t label,
                             const L2SoftmaxParams& params) {
  const auto fw = l2softmax_forward(x, label, params);
  const std::size_t n = params.num_classes();
  const std::size_t d = params.dim();

  L2SoftmaxGrad g;
  g.d_bias.assign(n, 0.0);
  g.loss = softmax_cross_entropy(fw.logits, label, g.d_bias);  // d_bias = dL/dz

  // dL/dW_j = g_j * alpha * u,  dL/dalpha = sum_j g_j W_j . u,  dL/du = alpha W^T g
  g.d_weights = Matrix(n, d);
  std::vector<double> d_unit(d, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const double gj = g.d_bias[j];
    simd::axpy(gj * params.alpha, fw.unit, g.d_weights.row(j));
    g.d_alpha += gj * simd::dot(params.weights.row(j), fw.unit);
    simd::axpy(gj * params.alpha, params.weights.row(j), d_unit);
  }

  // Normalization Jacobian (I - u u^T) / ||x||.
  const double radial = simd::dot(fw.unit, d_unit);
  g.d_input.resize(d);
  for (std::size_t i = 0; i < d; ++i) g.d_input[i] = (d_unit[i] - radial * fw.unit[i]) / fw.norm;
  return g;
}

LossWithGrad pixel_ce_loss(const HeatmapStack& logits, const PixelTarget& target) {
  const std::size_t classes = logits.channels();
  if (classes < 2) throw InvalidArgument("pixel_ce_loss: need at least 2 channels");
  if (target.height != logits.height() || target.width != logits.width() ||
      target.labels.size() != logits.plane_size()) {
    throw DimensionError("pixel_ce_loss: target geometry does not match logits");
  }
  const std::size_t plane = logits.plane_size();
  const double inv_pixels = 1.0 / static_cast<double>(plane);

  LossWithGrad out;
  out.grad.assign(logits.values().size(), 0.0);
  std::vector<double> pixel(classes);
  std::vector<double> pixel_grad(classes);
  for (std::size_t p = 0; p < plane; ++p) {
    const int label = target.labels[p];
    if (label < 0 || static_cast<std::size_t>(label) >= classes) {
      throw InvalidArgument("pixel_ce_loss: label " + std::to_string(label) + " out of range");
    }
    for (std::size_t k = 0; k < classes; ++k) pixel[k] = logits.values()[k * plane + p];
    out.loss += softmax_cross_entropy(pixel, static_cast<std::size_t>(label), pixel_grad);
    for (std::size_t k = 0; k < classes; ++k) out.grad[k * plane + p] = pixel_grad[k] * inv_pixels;
  }
  out.loss *= inv_pixels;
  return out;
}

LossWithGrad heatmap_mse_loss(const HeatmapStack& pred, const HeatmapStack& gt) {
  if (pred.channels() != gt.channels() || pred.height() != gt.height() ||
      pred.width() != gt.width()) {
    throw DimensionError("heatmap_mse_loss: shape mismatch");
  }
  LossWithGrad out;
  out.loss = simd::squared_distance(pred.values(), gt.values());
  out.grad.resize(pred.values().size());
  for (std::size_t i = 0; i < out.grad.size(); ++i) {
    out.grad[i] = 2.0 * (pred.values()[i] - gt.values()[i]);
  }
  return out;
}

LossWithGrad orientation_ce_loss(std::span<const double> logits, int target) {
  if (logits.size() != kNumOrientations) {
    throw DimensionError("orientation_ce_loss: expected 8 logits");
  }
  const auto t = index_of(orientation_from_index(target));
  LossWithGrad out;
  out.grad.resize(kNumOrientations);
  out.loss = softmax_cross_entropy(logits, t, out.grad);
  return out;
}

Stage2Loss stage2_loss(const HeatmapStack& pred, const HeatmapStack& gt,
                       std::span<const double> orientation_logits, int orientation_target,
                       double lambda) {
  if (!std::isfinite(lambda) || lambda < 0.0) {
    throw InvalidArgument("stage2_loss: lambda must be finite and non-negative");
  }
  auto hm = heatmap_mse_loss(pred, gt);
  auto ori = orientation_ce_loss(orientation_logits, orientation_target);
  Stage2Loss out;
  out.heatmap = hm.loss;
  out.orientation = ori.loss;
  out.total = hm.loss + lambda * ori.loss;
  out.heatmap_grad = std::move(hm.grad);
  out.logit_grad = std::move(ori.grad);
  for (double& g : out.logit_grad) g *= lambda;
  return out;
}

}  // namespace reid
