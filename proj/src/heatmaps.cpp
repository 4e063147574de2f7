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

#include "reid/heatmaps.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "reid/error.hpp"
#include "reid/simd.hpp"

namespace reid {

Heatmap::Heatmap(std::size_t height, std::size_t width, std::vector<double> values)
    : height_(height), width_(width), values_(std::move(values)) {
  if (values_.size() != height_ * width_) {
    throw DimensionError("heatmap: " + std::to_string(values_.size()) + " values for " +
                         std::to_string(height_) + "x" + std::to_string(width_) + " map");
  }
}

HeatmapStack::HeatmapStack(std::size_t channels, std::size_t height, std::size_t width,
                           double fill)
    : channels_(channels), height_(height), width_(width) {
  if (channels == 0 || height == 0 || width == 0) {
    throw DimensionError("heatmap stack: channels, height and width must be >= 1");
  }
  values_.assign(channels * height * width, fill);
}

HeatmapStack::HeatmapStack(std::size_t channels, std::size_t height, std::size_t width,
                           std::vector<double> values)
    : HeatmapStack(channels, height, width) {
  if (values.size() != values_.size()) {
    throw DimensionError("heatmap stack: expected " + std::to_string(values_.size()) +
                         " values, got " + std::to_string(values.size()));
  }
  values_ = std::move(values);
}

std::span<const double> HeatmapStack::channel(std::size_t c) const {
  if (c >= channels_) throw DimensionError("heatmap stack: channel out of range");
  return std::span<const double>(values_).subspan(c * plane_size(), plane_size());
}

std::span<double> HeatmapStack::channel(std::size_t c) {
  if (c >= channels_) throw DimensionError("heatmap stack: channel out of range");
  return std::span<double>(values_).subspan(c * plane_size(), plane_size());
}

Heatmap HeatmapStack::channel_map(std::size_t c) const {
  const auto plane = channel(c);
  return Heatmap(height_, width_, std::vector<double>(plane.begin(), plane.end()));
}

void HeatmapStack::set_channel(std::size_t c, const Heatmap& map) {
  if (map.height() != height_ || map.width() != width_) {
    throw DimensionError("heatmap stack: channel geometry mismatch");
  }
  std::ranges::copy(map.values(), channel(c).begin());
}

PeakLocation find_peak(std::span<const double> values, std::size_t height, std::size_t width) {
  if (values.empty() || height == 0 || width == 0 || values.size() != height * width) {
    throw DimensionError("find_peak: empty or inconsistent map");
  }
  const std::size_t idx = simd::argmax(values);
  return PeakLocation{idx % width, idx / width, values[idx]};
}

PeakLocation find_peak(const Heatmap& map) {
  return find_peak(map.values(), map.height(), map.width());
}

Heatmap render_gaussian(const PeakLocation& center, double sigma, std::size_t height,
                        std::size_t width) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw InvalidArgument("render_gaussian: sigma must be positive");
  }
  Heatmap out(height, width);
  const double inv_two_var = 1.0 / (2.0 * sigma * sigma);
  const double cx = static_cast<double>(center.x);
  const double cy = static_cast<double>(center.y);
  for (std::size_t y = 0; y < height; ++y) {
    const double dy = static_cast<double>(y) - cy;
    for (std::size_t x = 0; x < width; ++x) {
      const double dx = static_cast<double>(x) - cx;
      out.at(y, x) = std::exp(-(dy * dy + dx * dx) * inv_two_var);
    }
  }
  return out;
}

Heatmap dilate_at_peak(const Heatmap& map, double sigma) {
  return render_gaussian(find_peak(map), sigma, map.height(), map.width());
}

HeatmapStack foreground(const HeatmapStack& stack) {
  if (stack.channels() == kNumKeypoints) return stack;
  if (stack.channels() != kNumChannelsWithBackground) {
    throw DimensionError("foreground: expected 20 or 21 channels, got " +
                         std::to_string(stack.channels()));
  }
  const auto fg = stack.values().first(kNumKeypoints * stack.plane_size());
  return HeatmapStack(kNumKeypoints, stack.height(), stack.width(),
                      std::vector<double>(fg.begin(), fg.end()));
}

HeatmapStack stack_selected(const HeatmapStack& stack, std::span<const int> indices,
                            double sigma) {
  if (stack.channels() != kNumKeypoints && stack.channels() != kNumChannelsWithBackground) {
    throw DimensionError("stack_selected: expected 20 or 21 channels, got " +
                         std::to_string(stack.channels()));
  }
  if (indices.size() != kNumSelectedKeypoints) {
    throw InvalidArgument("stack_selected: expected 7 key-point indices");
  }
  std::array<bool, kNumKeypoints + 1> seen{};
  for (int k : indices) {
    if (k < 1 || k > static_cast<int>(kNumKeypoints)) {
      throw InvalidArgument("stack_selected: key-point index " + std::to_string(k) +
                            " outside 1..20");
    }
    if (seen[static_cast<std::size_t>(k)]) {
      throw InvalidArgument("stack_selected: duplicate key-point index " + std::to_string(k));
    }
    seen[static_cast<std::size_t>(k)] = true;
  }

  HeatmapStack out(indices.size(), stack.height(), stack.width());
  for (std::size_t c = 0; c < indices.size(); ++c) {
    const auto src = static_cast<std::size_t>(indices[c] - 1);
    const PeakLocation peak = find_peak(stack.channel(src), stack.height(), stack.width());
    out.set_channel(c, render_gaussian(peak, sigma, stack.height(), stack.width()));
  }
  return out;
}

}  // namespace reid
