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

// Key-point heatmaps: peak finding, Gaussian rendering and the dilation /
// stacking applied to the seven selected key-point channels.
//
// Coordinates are 0-indexed with x = column and y = row. Values are stored
// row-major within a channel and channel-major within a stack.

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace reid {

inline constexpr std::size_t kNumKeypoints = 20;          // foreground channels
inline constexpr std::size_t kNumChannelsWithBackground = 21;
inline constexpr std::size_t kBackgroundChannel = 20;     // 0-based, last
inline constexpr std::size_t kDefaultMapSize = 56;
inline constexpr std::size_t kNumSelectedKeypoints = 7;
inline constexpr double kDefaultDilationSigma = 2.0;

struct PeakLocation {
  std::size_t x = 0;
  std::size_t y = 0;
  double value = 0.0;

  bool same_location(const PeakLocation& other) const { return x == other.x && y == other.y; }
  friend bool operator==(const PeakLocation&, const PeakLocation&) = default;
};

// Single-channel map. A 0x0 map is representable so that callers get a
// DimensionError from the operations rather than from construction.
class Heatmap {
 public:
  Heatmap() = default;
  Heatmap(std::size_t height, std::size_t width, double fill = 0.0)
      : height_(height), width_(width), values_(height * width, fill) {}
  Heatmap(std::size_t height, std::size_t width, std::vector<double> values);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  bool empty() const { return values_.empty(); }

  double& at(std::size_t y, std::size_t x) { return values_[y * width_ + x]; }
  double at(std::size_t y, std::size_t x) const { return values_[y * width_ + x]; }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<double> values_;
};

class HeatmapStack {
 public:
  HeatmapStack() = default;
  // Throws DimensionError unless channels, height and width are all >= 1.
  HeatmapStack(std::size_t channels, std::size_t height, std::size_t width, double fill = 0.0);
  HeatmapStack(std::size_t channels, std::size_t height, std::size_t width,
               std::vector<double> values);

  std::size_t channels() const { return channels_; }
  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t plane_size() const { return height_ * width_; }

  double& at(std::size_t c, std::size_t y, std::size_t x) {
    return values_[(c * height_ + y) * width_ + x];
  }
  double at(std::size_t c, std::size_t y, std::size_t x) const {
    return values_[(c * height_ + y) * width_ + x];
  }

  std::span<const double> channel(std::size_t c) const;
  std::span<double> channel(std::size_t c);
  Heatmap channel_map(std::size_t c) const;
  void set_channel(std::size_t c, const Heatmap& map);

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  friend bool operator==(const HeatmapStack&, const HeatmapStack&) = default;

 private:
  std::size_t channels_ = 0;
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<double> values_;
};

// Global maximum; ties resolve to the smallest row-major index.
PeakLocation find_peak(const Heatmap& map);
PeakLocation find_peak(std::span<const double> values, std::size_t height, std::size_t width);

// Peak-normalized Gaussian: exp(-((y-cy)^2 + (x-cx)^2) / (2 sigma^2)).
Heatmap render_gaussian(const PeakLocation& center, double sigma, std::size_t height,
                        std::size_t width);

// Replaces the map with a Gaussian placed at its own peak.
Heatmap dilate_at_peak(const Heatmap& map, double sigma = kDefaultDilationSigma);

// The 20 key-point channels of a 20- or 21-channel stack (background dropped).
HeatmapStack foreground(const HeatmapStack& stack);

// Builds the 7-channel attention stack: output channel k is input channel
// indices[k] (1-based key-point id) dilated at its own peak. Accepts 20- or
// 21-channel input; the background channel is never selectable.
HeatmapStack stack_selected(const HeatmapStack& stack, std::span<const int> indices,
                            double sigma = kDefaultDilationSigma);

}  // namespace reid
